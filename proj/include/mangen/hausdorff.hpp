#pragma once

#include "mangen/point_cloud.hpp"

#include <cstdint>
#include <unordered_map>

namespace mangen {

/// Squared Euclidean distance; the single summation order shared by every
/// Hausdorff path so accelerated and brute-force results compare bit-exactly.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

/// Uniform grid over a point set with cell size equal to the median
/// nearest-neighbour spacing. Queries are exact: the 3^d block around the
/// query cell is searched and the result is accepted only if it is closer than
/// the block boundary; otherwise the query falls back to a full scan.
class GridIndex {
public:
    explicit GridIndex(const PointCloud& points);

    double cell_size() const { return cell_size_; }
    bool uses_blocks() const { return use_blocks_; }

    /// Squared distance to the nearest indexed point, except that the scan may
    /// stop early once the running minimum drops to `stop_below_sq` or less
    /// (the returned value is then some distance <= stop_below_sq).
    double nearest_sq(std::span<const double> q, double stop_below_sq = -1.0) const;

private:
    std::uint64_t cell_key(std::span<const long long> cell) const;
    double full_scan(std::span<const double> q, double stop_below_sq) const;

    const PointCloud& points_;
    int dim_;
    double cell_size_ = 1.0;
    bool use_blocks_ = false;
    Vector origin_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

/// max_{x in X} min_{y in Y} |x - y|, OpenMP-parallel over X.
double directed_hausdorff(const PointCloud& x, const PointCloud& y);
/// max(directed(X, Y), directed(Y, X)).
double hausdorff(const PointCloud& x, const PointCloud& y);

/// Exhaustive double loop; |X| * |Y| is capped at kBruteForceCap.
inline constexpr double kBruteForceCap = 1e7;
double brute_force_directed(const PointCloud& x, const PointCloud& y);
double brute_force_hausdorff(const PointCloud& x, const PointCloud& y);

namespace serial {
/// Single-threaded version of the indexed kernel.
double directed_hausdorff(const PointCloud& x, const PointCloud& y);
double hausdorff(const PointCloud& x, const PointCloud& y);
} // namespace serial

} // namespace mangen
