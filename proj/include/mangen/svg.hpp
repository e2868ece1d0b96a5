#pragma once

#include "mangen/point_cloud.hpp"

#include <string>
#include <vector>

namespace mangen {

struct ScatterLayer {
    const PointCloud* cloud = nullptr;
    std::string colour;
    double radius = 1.5;
};

/// Flat scatter plot of the layers drawn in order. 1-d clouds go on a line,
/// 2-d clouds are drawn as is, and higher dimensions use an orthographic view
/// of the first three coordinates.
std::string scatter_svg(const std::vector<ScatterLayer>& layers, const std::string& title, int size = 480);
void save_scatter_svg(const std::vector<ScatterLayer>& layers, const std::string& title, const std::string& path);

} // namespace mangen
