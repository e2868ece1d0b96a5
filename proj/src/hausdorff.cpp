#include "mangen/hausdorff.hpp"
#include "mangen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mangen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kSpacingProbes = 512;

void require_compatible(const PointCloud& x, const PointCloud& y) {
    if (x.empty() || y.empty()) throw ArgumentError("Hausdorff distance needs two nonempty point clouds");
    if (x.dim() != y.dim()) {
        throw ShapeError("point clouds have different ambient dimensions (" + std::to_string(x.dim()) + " vs " +
                         std::to_string(y.dim()) + ")");
    }
}

// Median nearest-neighbour spacing over an evenly strided subset of probes.
double median_spacing(const PointCloud& points) {
    const std::size_t n = points.size();
    if (n < 2) return 0.0;
    const std::size_t probes = std::min(n, kSpacingProbes);
    std::vector<double> gaps;
    gaps.reserve(probes);
    for (std::size_t p = 0; p < probes; ++p) {
        const std::size_t i = p * n / probes;
        double best = kInf;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) best = std::min(best, squared_distance(points.point(i), points.point(j)));
        }
        if (best > 0.0) gaps.push_back(best);
    }
    if (gaps.empty()) return 0.0;
    auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    return std::sqrt(*mid);
}

} // namespace

GridIndex::GridIndex(const PointCloud& points) : points_(points), dim_(points.dim()) {
    if (points.empty()) throw ArgumentError("cannot index an empty point cloud");
    const std::size_t n = points.size();
    // 3^d block lookups only pay off while they are cheaper than a scan
    double block_cells = 1.0;
    for (int i = 0; i < dim_; ++i) block_cells *= 3.0;
    const double spacing = median_spacing(points);
    use_blocks_ = spacing > 0.0 && block_cells * 4.0 < static_cast<double>(n);
    if (!use_blocks_) return;

    cell_size_ = spacing;
    origin_ = points.row(0);
    for (std::size_t i = 1; i < n; ++i) origin_ = origin_.cwiseMin(points.row(i));

    std::vector<long long> cell(static_cast<std::size_t>(dim_));
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = points.point(i);
        for (int a = 0; a < dim_; ++a) {
            cell[static_cast<std::size_t>(a)] = static_cast<long long>(std::floor((p[a] - origin_[a]) / cell_size_));
        }
        cells_[cell_key(cell)].push_back(static_cast<std::uint32_t>(i));
    }
}

// Hash collisions only merge cells, which adds candidates but never drops one.
std::uint64_t GridIndex::cell_key(std::span<const long long> cell) const {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (long long c : cell) h = splitmix64(h ^ static_cast<std::uint64_t>(c));
    return h;
}

double GridIndex::full_scan(std::span<const double> q, double stop_below_sq) const {
    double best = kInf;
    for (std::size_t j = 0; j < points_.size(); ++j) {
        best = std::min(best, squared_distance(q, points_.point(j)));
        if (best <= stop_below_sq) break;
    }
    return best;
}

double GridIndex::nearest_sq(std::span<const double> q, double stop_below_sq) const {
    if (!use_blocks_) return full_scan(q, stop_below_sq);

    std::vector<long long> centre(static_cast<std::size_t>(dim_));
    double boundary = kInf;
    for (int a = 0; a < dim_; ++a) {
        const double rel = (q[static_cast<std::size_t>(a)] - origin_[a]) / cell_size_;
        const double c = std::floor(rel);
        centre[static_cast<std::size_t>(a)] = static_cast<long long>(c);
        const double below = (rel - (c - 1.0)) * cell_size_;
        const double above = ((c + 2.0) - rel) * cell_size_;
        boundary = std::min({boundary, below, above});
    }

    double best = kInf;
    std::vector<long long> cell(centre);
    std::vector<int> offset(static_cast<std::size_t>(dim_), -1);
    while (true) {
        for (int a = 0; a < dim_; ++a) {
            cell[static_cast<std::size_t>(a)] = centre[static_cast<std::size_t>(a)] + offset[static_cast<std::size_t>(a)];
        }
        if (auto it = cells_.find(cell_key(cell)); it != cells_.end()) {
            for (std::uint32_t j : it->second) best = std::min(best, squared_distance(q, points_.point(j)));
        }
        int a = 0;
        while (a < dim_ && ++offset[static_cast<std::size_t>(a)] > 1) {
            offset[static_cast<std::size_t>(a)] = -1;
            ++a;
        }
        if (a == dim_) break;
    }
    if (best <= boundary * boundary || best <= stop_below_sq) return best;
    return full_scan(q, stop_below_sq);
}

// A query whose nearest distance cannot exceed the running maximum is
// abandoned early; the maximum itself is always an exact pair distance.
double directed_hausdorff(const PointCloud& x, const PointCloud& y) {
    require_compatible(x, y);
    const GridIndex index(y);
    const std::size_t n = x.size();
    double worst = 0.0;
#pragma omp parallel
    {
        double local = 0.0;
#pragma omp for schedule(dynamic, 64) nowait
        for (std::size_t i = 0; i < n; ++i) {
            local = std::max(local, index.nearest_sq(x.point(i), local));
        }
#pragma omp critical
        worst = std::max(worst, local);
    }
    return std::sqrt(worst);
}

double hausdorff(const PointCloud& x, const PointCloud& y) {
    return std::max(directed_hausdorff(x, y), directed_hausdorff(y, x));
}

double brute_force_directed(const PointCloud& x, const PointCloud& y) {
    require_compatible(x, y);
    if (static_cast<double>(x.size()) * static_cast<double>(y.size()) > kBruteForceCap) {
        throw ResourceError("brute-force Hausdorff limited to |X|*|Y| <= 1e7 pairs");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double best = kInf;
        for (std::size_t j = 0; j < y.size(); ++j) best = std::min(best, squared_distance(x.point(i), y.point(j)));
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

double brute_force_hausdorff(const PointCloud& x, const PointCloud& y) {
    return std::max(brute_force_directed(x, y), brute_force_directed(y, x));
}

namespace serial {

double directed_hausdorff(const PointCloud& x, const PointCloud& y) {
    require_compatible(x, y);
    const GridIndex index(y);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, index.nearest_sq(x.point(i), worst));
    return std::sqrt(worst);
}

double hausdorff(const PointCloud& x, const PointCloud& y) {
    return std::max(serial::directed_hausdorff(x, y), serial::directed_hausdorff(y, x));
}

} // namespace serial

} // namespace mangen
