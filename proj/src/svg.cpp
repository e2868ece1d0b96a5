#include "mangen/svg.hpp"
#include "mangen/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace mangen {

namespace {

std::array<double, 2> project(std::span<const double> p) {
    if (p.size() == 1) return {p[0], 0.0};
    if (p.size() == 2) return {p[0], p[1]};
    // Orthographic view: azimuth 35 degrees, elevation 25 degrees.
    const double ca = std::cos(0.61), sa = std::sin(0.61), ce = std::cos(0.436), se = std::sin(0.436);
    const double x = p[0], y = p[1], z = p[2];
    return {ca * x - sa * y, ce * z - se * (sa * x + ca * y)};
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string scatter_svg(const std::vector<ScatterLayer>& layers, const std::string& title, int size) {
    double lo0 = std::numeric_limits<double>::infinity(), lo1 = lo0, hi0 = -lo0, hi1 = -lo0;
    for (const auto& layer : layers) {
        for (std::size_t i = 0; i < layer.cloud->size(); ++i) {
            const auto q = project(layer.cloud->point(i));
            lo0 = std::min(lo0, q[0]);
            hi0 = std::max(hi0, q[0]);
            lo1 = std::min(lo1, q[1]);
            hi1 = std::max(hi1, q[1]);
        }
    }
    if (!(hi0 >= lo0)) lo0 = lo1 = -1.0, hi0 = hi1 = 1.0;
    const double span = std::max({hi0 - lo0, hi1 - lo1, 1e-12});
    const double margin = 24.0, scale = (size - 2 * margin) / span;
    const double c0 = 0.5 * (lo0 + hi0), c1 = 0.5 * (lo1 + hi1);

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
       << size << ' ' << size << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"8\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\">" << escape(title) << "</text>\n";
    char buf[96];
    for (const auto& layer : layers) {
        os << "<g fill=\"" << escape(layer.colour) << "\" fill-opacity=\"0.6\">"
           << "<title>" << escape(layer.cloud->label()) << "</title>\n";
        for (std::size_t i = 0; i < layer.cloud->size(); ++i) {
            const auto q = project(layer.cloud->point(i));
            const double x = 0.5 * size + (q[0] - c0) * scale;
            const double y = 0.5 * size - (q[1] - c1) * scale;
            std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\"/>\n", x, y, layer.radius);
            os << buf;
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void save_scatter_svg(const std::vector<ScatterLayer>& layers, const std::string& title, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << scatter_svg(layers, title);
    if (!out) throw IoError("failed writing " + path);
}

} // namespace mangen
