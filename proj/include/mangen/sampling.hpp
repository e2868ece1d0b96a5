#pragma once

#include "mangen/manifold.hpp"
#include "mangen/point_cloud.hpp"
#include "mangen/rng.hpp"

#include <cstdint>
#include <vector>

namespace mangen {

/// Volume-uniform chart samples by rejection against sqrt(det g). The density
/// bound is the maximum over a tabulation grid with 10% headroom.
std::vector<ChartPoint> sample_rejection(const EmbeddedManifold& m, const Box& region, std::size_t count, Rng& rng);

/// Inverse-CDF (Rosenblatt) sampler over a chart box for d <= 2, built on a
/// tabulated piecewise-constant volume density. For d >= 3 it falls back to
/// rejection sampling.
class AreaSampler {
public:
    AreaSampler(const EmbeddedManifold& m, const Box& region);

    /// Maps u in [0, 1)^d to a chart point; volume-uniform when u is uniform.
    ChartPoint map_unit(const Vector& u) const;
    std::vector<ChartPoint> iid(std::size_t count, std::uint64_t seed) const;
    /// Randomly shifted lattice pushed through the inverse CDF: every point is
    /// marginally volume-uniform while the set covers the manifold evenly.
    std::vector<ChartPoint> stratified(std::size_t count, std::uint64_t seed) const;

    const Box& region() const { return region_; }

private:
    double invert(const std::vector<double>& cdf, double u, double lo, double width) const;

    const EmbeddedManifold* manifold_;
    Box region_;
    int cells0_ = 0;
    int cells1_ = 0;
    std::vector<double> cdf0_;               // cumulative marginal along axis 0
    std::vector<std::vector<double>> cdf1_;  // conditional cumulative along axis 1, per axis-0 cell
};

/// Embeds chart points into an ambient point cloud.
PointCloud embed_all(const EmbeddedManifold& m, const std::vector<ChartPoint>& chart_points, std::string label = {});

/// Evenly covering volume-uniform sample of the whole manifold.
PointCloud sample_manifold(const EmbeddedManifold& m, std::size_t count, std::uint64_t seed, std::string label = {});

} // namespace mangen
