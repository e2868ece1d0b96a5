#include "mangen/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace mangen {

namespace {

constexpr int kTable1d = 8192;
constexpr int kTable2d = 512;
constexpr double kGoldenFraction = 0.6180339887498949;

double fractional(double x) { return x - std::floor(x); }

double density_bound(const EmbeddedManifold& m, const Box& region) {
    const int per_axis = m.dim == 1 ? 4096 : (m.dim == 2 ? 128 : 16);
    long long total = 1;
    for (int i = 0; i < m.dim; ++i) total *= per_axis;
    double best = 0.0;
    ChartPoint x(m.dim);
    for (long long flat = 0; flat < total; ++flat) {
        long long rest = flat;
        for (int a = 0; a < m.dim; ++a) {
            const long long idx = rest % per_axis;
            rest /= per_axis;
            x[a] = region.lo[a] + (static_cast<double>(idx) + 0.5) * (region.hi[a] - region.lo[a]) / per_axis;
        }
        best = std::max(best, volume_density(m, x));
    }
    return 1.1 * best;
}

} // namespace

std::vector<ChartPoint> sample_rejection(const EmbeddedManifold& m, const Box& region, std::size_t count, Rng& rng) {
    if (region.dim() != m.dim) throw ShapeError("sampling region dimension does not match " + m.id);
    const double bound = density_bound(m, region);
    if (!(bound > 0.0)) throw SingularityError("volume density vanishes on the sampling region of " + m.id);
    std::vector<ChartPoint> out;
    out.reserve(count);
    ChartPoint x(m.dim);
    while (out.size() < count) {
        for (int a = 0; a < m.dim; ++a) x[a] = rng.uniform(region.lo[a], region.hi[a]);
        if (rng.uniform() * bound < volume_density(m, x)) out.push_back(x);
    }
    return out;
}

AreaSampler::AreaSampler(const EmbeddedManifold& m, const Box& region) : manifold_(&m), region_(region) {
    if (region.dim() != m.dim) throw ShapeError("sampling region dimension does not match " + m.id);
    if (region.measure() <= 0.0) throw ArgumentError("sampling region of " + m.id + " is empty");
    if (m.dim > 2) return;

    cells0_ = m.dim == 1 ? kTable1d : kTable2d;
    cells1_ = m.dim == 1 ? 1 : kTable2d;
    const double w0 = (region.hi[0] - region.lo[0]) / cells0_;
    const double w1 = m.dim == 2 ? (region.hi[1] - region.lo[1]) / cells1_ : 0.0;

    std::vector<std::vector<double>> rows(static_cast<std::size_t>(cells0_));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < cells0_; ++i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        row.assign(static_cast<std::size_t>(cells1_) + 1, 0.0);
        ChartPoint x(m.dim);
        x[0] = region.lo[0] + (i + 0.5) * w0;
        for (int j = 0; j < cells1_; ++j) {
            if (m.dim == 2) x[1] = region.lo[1] + (j + 0.5) * w1;
            row[static_cast<std::size_t>(j) + 1] = row[static_cast<std::size_t>(j)] + volume_density(m, x);
        }
    }
    cdf0_.assign(static_cast<std::size_t>(cells0_) + 1, 0.0);
    for (int i = 0; i < cells0_; ++i) {
        cdf0_[static_cast<std::size_t>(i) + 1] = cdf0_[static_cast<std::size_t>(i)] + rows[static_cast<std::size_t>(i)].back();
    }
    if (!(cdf0_.back() > 0.0)) throw SingularityError("volume density vanishes on the sampling region of " + m.id);
    if (m.dim == 2) cdf1_ = std::move(rows);
}

double AreaSampler::invert(const std::vector<double>& cdf, double u, double lo, double width) const {
    const double target = u * cdf.back();
    // first cell whose upper cumulative value exceeds the target
    auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), target);
    if (it == cdf.end()) --it;
    const auto cell = static_cast<int>(it - cdf.begin()) - 1;
    const double mass = cdf[static_cast<std::size_t>(cell) + 1] - cdf[static_cast<std::size_t>(cell)];
    const double frac = mass > 0.0 ? std::clamp((target - cdf[static_cast<std::size_t>(cell)]) / mass, 0.0, 1.0) : 0.5;
    return lo + (cell + frac) * width;
}

ChartPoint AreaSampler::map_unit(const Vector& u) const {
    if (manifold_->dim > 2) throw ArgumentError("inverse-CDF sampling supports intrinsic dimension <= 2");
    ChartPoint x(manifold_->dim);
    const double w0 = (region_.hi[0] - region_.lo[0]) / cells0_;
    x[0] = invert(cdf0_, u[0], region_.lo[0], w0);
    if (manifold_->dim == 2) {
        const int row = std::clamp(static_cast<int>((x[0] - region_.lo[0]) / w0), 0, cells0_ - 1);
        const double w1 = (region_.hi[1] - region_.lo[1]) / cells1_;
        x[1] = invert(cdf1_[static_cast<std::size_t>(row)], u[1], region_.lo[1], w1);
    }
    return x;
}

std::vector<ChartPoint> AreaSampler::iid(std::size_t count, std::uint64_t seed) const {
    Rng rng(seed);
    if (manifold_->dim > 2) return sample_rejection(*manifold_, region_, count, rng);
    std::vector<ChartPoint> out;
    out.reserve(count);
    Vector u(manifold_->dim);
    for (std::size_t i = 0; i < count; ++i) {
        for (int a = 0; a < manifold_->dim; ++a) u[a] = rng.uniform();
        out.push_back(map_unit(u));
    }
    return out;
}

std::vector<ChartPoint> AreaSampler::stratified(std::size_t count, std::uint64_t seed) const {
    Rng rng(seed);
    if (manifold_->dim > 2) return sample_rejection(*manifold_, region_, count, rng);
    const double shift0 = rng.uniform();
    const double shift1 = rng.uniform();
    std::vector<ChartPoint> out(count);
    const double n = static_cast<double>(count);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < count; ++i) {
        Vector u(manifold_->dim);
        u[0] = (static_cast<double>(i) + shift0) / n;
        if (manifold_->dim == 2) u[1] = fractional(shift1 + static_cast<double>(i) * kGoldenFraction);
        out[i] = map_unit(u);
    }
    return out;
}

PointCloud embed_all(const EmbeddedManifold& m, const std::vector<ChartPoint>& chart_points, std::string label) {
    PointCloud cloud(m.ambient_dim, std::move(label));
    cloud.reserve(chart_points.size());
    for (const auto& p : chart_points) cloud.push_back(m.embedding(p));
    return cloud;
}

PointCloud sample_manifold(const EmbeddedManifold& m, std::size_t count, std::uint64_t seed, std::string label) {
    const AreaSampler sampler(m, m.chart_domain);
    return embed_all(m, sampler.stratified(count, seed), std::move(label));
}

} // namespace mangen
