#include "mangen/cycle.hpp"
#include "mangen/hausdorff.hpp"
#include "mangen/rank.hpp"
#include "mangen/rng.hpp"
#include "mangen/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mangen {

namespace {

int default_resolution(const EmbeddedManifold& m, int requested) {
    if (requested > 0) return requested;
    return m.dim == 1 ? 4096 : 256;
}

Box shrink(const Box& base, double r) {
    const Vector c = base.center();
    const Vector half = 0.5 * r * base.extent();
    return {c - half, c + half};
}

double deficit_of(const EmbeddedManifold& m, const Box& kept, double total, int resolution) {
    return std::max(0.0, total - volume(m, kept, resolution));
}

double max_norm_over(const std::vector<Vector>& a, const std::vector<Vector>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).norm());
    return worst;
}

std::vector<Vector> rows_of(const PointCloud& c) {
    std::vector<Vector> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c.row(i);
    return out;
}

std::vector<Vector> map_all(const PointMap& f, const std::vector<Vector>& xs) {
    std::vector<Vector> out(xs.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f(xs[i]);
    return out;
}

double max_operator_norm(const std::function<Matrix(const Vector&)>& jac, const std::vector<Vector>& a,
                         const std::vector<Vector>& b) {
    std::vector<double> norms(a.size() + b.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < norms.size(); ++i) norms[i] = spectral_norm(jac(i < a.size() ? a[i] : b[i - a.size()]));
    return norms.empty() ? 0.0 : *std::max_element(norms.begin(), norms.end());
}

std::vector<Sample> make_samples(const std::vector<Vector>& xs, const PointMap& truth) {
    std::vector<Sample> out(xs.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = {xs[i], truth(xs[i])};
    return out;
}

} // namespace

Vector ChartSubset::normalize(const ChartPoint& p) const {
    return (p - kept.lo).cwiseQuotient(kept.extent());
}

ChartPoint ChartSubset::denormalize(const Vector& u) const {
    return kept.lo + u.cwiseProduct(kept.extent());
}

ChartPoint ChartSubset::chart_of(const AmbientPoint& x) const {
    if (!manifold.chart_inverse) throw ArgumentError(manifold.id + " has no chart inverse");
    ChartPoint c = manifold.chart_inverse(x);
    const Vector centre = kept.center();
    for (int i = 0; i < manifold.dim; ++i) {
        if (!manifold.is_periodic(i)) continue;
        const double period = manifold.chart_domain.hi[i] - manifold.chart_domain.lo[i];
        c[i] -= period * std::round((c[i] - centre[i]) / period);
    }
    return c;
}

ChartSubset chart_subset_from_box(const EmbeddedManifold& m, const Box& kept, int resolution) {
    ChartSubset s;
    s.manifold = m;
    s.kept = kept;
    s.quadrature_resolution = default_resolution(m, resolution);
    s.measure_deficit = deficit_of(m, kept, total_volume(m, s.quadrature_resolution), s.quadrature_resolution);
    return s;
}

ChartSubset build_chart_subset(const EmbeddedManifold& m, double delta, const ChartSubsetOptions& options) {
    const int res = default_resolution(m, options.resolution);
    const double total = total_volume(m, res);
    if (!(delta > 0.0 && delta < total)) {
        std::ostringstream os;
        os << "delta must lie in (0, " << total << ") for " << m.id << ", got " << delta;
        throw ArgumentError(os.str());
    }
    if (!(options.target_fraction > 0.0 && options.target_fraction <= 1.0)) {
        throw ArgumentError("target_fraction must lie in (0, 1]");
    }

    ChartSubset s;
    s.manifold = m;
    s.quadrature_resolution = res;
    Box base = m.chart_domain;
    for (int i = 0; i < m.dim; ++i) {
        if (!m.is_periodic(i)) continue;
        const double w = options.slit_fraction * (base.hi[i] - base.lo[i]);
        s.slit_width = std::max(s.slit_width, w);
        base.lo[i] += 0.5 * w;
        base.hi[i] -= 0.5 * w;
    }

    const double target = options.target_fraction * delta;
    double d_hi = deficit_of(m, base, total, res);
    if (d_hi >= delta) {
        std::ostringstream os;
        os << "delta " << delta << " is below the measure " << d_hi << " removed by the chart cut on " << m.id;
        throw PrecisionError(os.str());
    }
    double lo = 0.0, hi = 1.0;
    if (d_hi > target) {
        s.radius_param = 1.0;
    } else {
        // deficit(lo) > target >= deficit(hi); deficit decreases in r.
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double d = deficit_of(m, shrink(base, mid), total, res);
            if (d <= target) {
                hi = mid;
                d_hi = d;
            } else {
                lo = mid;
            }
        }
        s.radius_param = hi;
    }
    s.kept = shrink(base, s.radius_param);
    s.measure_deficit = d_hi;

    const double check = deficit_of(m, s.kept, total, 2 * res);
    if (std::abs(check - s.measure_deficit) > 0.01 * delta || check >= delta) {
        std::ostringstream os;
        os << "quadrature at " << res << " and " << 2 * res << " cells disagrees (" << s.measure_deficit << " vs "
           << check << ") relative to delta " << delta;
        throw PrecisionError(os.str());
    }
    return s;
}

std::pair<ChartSubset, ChartSubset> build_aligned_subsets(const EmbeddedManifold& src, const EmbeddedManifold& dst,
                                                          double delta, const ChartSubsetOptions& options) {
    if (src.dim != dst.dim || src.periodic != dst.periodic || src.chart_domain.lo != dst.chart_domain.lo ||
        src.chart_domain.hi != dst.chart_domain.hi) {
        throw ArgumentError("aligned subsets need identical chart domains (" + src.id + " vs " + dst.id + ")");
    }
    const ChartSubset own_src = build_chart_subset(src, delta, options);
    const ChartSubset own_dst = build_chart_subset(dst, delta, options);
    for (const ChartSubset* pick : {&own_dst, &own_src}) {
        ChartSubset a = chart_subset_from_box(src, pick->kept, own_src.quadrature_resolution);
        ChartSubset b = chart_subset_from_box(dst, pick->kept, own_dst.quadrature_resolution);
        if (a.measure_deficit < delta && b.measure_deficit < delta) {
            a.slit_width = b.slit_width = pick->slit_width;
            a.radius_param = b.radius_param = pick->radius_param;
            return {std::move(a), std::move(b)};
        }
    }
    throw PrecisionError("no shared chart box keeps both deficits below delta");
}

Diffeo ground_truth_diffeo(const ChartSubset& src, const ChartSubset& dst) {
    if (src.manifold.dim != dst.manifold.dim) {
        std::ostringstream os;
        os << "cannot map " << src.manifold.id << " (dim " << src.manifold.dim << ") to " << dst.manifold.id << " (dim "
           << dst.manifold.dim << ")";
        throw ArgumentError(os.str());
    }
    if (!src.manifold.chart_inverse || !dst.manifold.chart_inverse) throw ArgumentError("chart inverse required");
    Diffeo d;
    d.forward = [src, dst](const Vector& x) {
        return dst.manifold.embedding(wrap(dst.manifold, dst.denormalize(src.normalize(src.chart_of(x)))));
    };
    d.inverse = [src, dst](const Vector& y) {
        return src.manifold.embedding(wrap(src.manifold, src.denormalize(dst.normalize(dst.chart_of(y)))));
    };
    return d;
}

PointCloud sample_subset(const ChartSubset& s, std::size_t count, std::uint64_t seed, std::string label) {
    const AreaSampler sampler(s.manifold, s.kept);
    return embed_all(s.manifold, sampler.stratified(count, seed), std::move(label));
}

CyclePair train_cycle(const ChartSubset& src, const ChartSubset& dst, const CycleTrainOptions& options,
                      const TrainConfig& config) {
    if (options.train_samples == 0 || options.held_out == 0) throw ArgumentError("cycle training needs samples");
    if (options.tube_width < 0.0) throw ArgumentError("tube_width must be non-negative");
    const Diffeo truth = ground_truth_diffeo(src, dst);

    auto fit = [&](const ChartSubset& from, const ChartSubset& to, const PointMap& target, const std::string& tag,
                   NetworkSpec& net, std::vector<double>& history) {
        std::vector<Vector> xs = rows_of(sample_subset(from, options.train_samples, derive_seed(config.seed, tag + "-train")));
        if (options.tube_width > 0.0) {
            Rng jitter(derive_seed(config.seed, tag + "-tube"));
            for (auto& x : xs)
                for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += options.tube_width * jitter.normal();
        }
        net = make_mlp(from.manifold.ambient_dim, options.hidden, to.manifold.ambient_dim,
                       derive_seed(config.seed, tag + "-init"));
        TrainConfig c = config;
        c.seed = derive_seed(config.seed, tag + "-shuffle");
        TrainResult r = train_regression(std::move(net), make_samples(xs, target), c);
        net = std::move(r.net);
        history = std::move(r.loss_history);
        const auto held = rows_of(sample_subset(from, options.held_out, derive_seed(config.seed, tag + "-heldout")));
        return max_pointwise_error(net, make_samples(held, target));
    };

    CyclePair pair;
    pair.source = src;
    pair.target = dst;
    pair.fit_eps_forward = fit(src, dst, truth.forward, "cycle-forward", pair.forward_net, pair.forward_loss);
    pair.fit_eps_backward = fit(dst, src, truth.inverse, "cycle-backward", pair.backward_net, pair.backward_loss);
    pair.fit_eps = std::max(pair.fit_eps_forward, pair.fit_eps_backward);
    return pair;
}

Matrix finite_difference_jacobian(const PointMap& f, const Vector& x) {
    const Vector f0 = f(x);
    Matrix j(f0.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        Vector a = x, b = x;
        a[i] += h;
        b[i] -= h;
        j.col(i) = (f(a) - f(b)) / (2.0 * h);
    }
    return j;
}

CycleReport evaluate_cycle_maps(const CycleMaps& maps, const ChartSubset& src, const ChartSubset& dst,
                                std::size_t sample_count, std::uint64_t seed, double fit_eps_floor) {
    if (sample_count < 2) throw ArgumentError("cycle evaluation needs at least two samples");
    const Diffeo truth = ground_truth_diffeo(src, dst);
    const PointCloud xs_cloud = sample_subset(src, sample_count, derive_seed(seed, "eval-source"), "source");
    const PointCloud ys_cloud = sample_subset(dst, sample_count, derive_seed(seed, "eval-target"), "target");
    const auto xs = rows_of(xs_cloud), ys = rows_of(ys_cloud);

    const auto fx = map_all(maps.f, xs), gy = map_all(maps.g, ys);
    const auto true_fx = map_all(truth.forward, xs), true_gy = map_all(truth.inverse, ys);
    const auto gfx = map_all(maps.g, fx), fgy = map_all(maps.f, gy);
    // Fit errors where the composition estimate uses them: f at x, g at f(x), and mirrored.
    const auto g_on_true = map_all(maps.g, true_fx), f_on_true = map_all(maps.f, true_gy);
    const auto id_src = map_all(truth.inverse, true_fx), id_dst = map_all(truth.forward, true_gy);

    CycleReport r;
    r.sample_count = sample_count;
    r.fit_eps = std::max({fit_eps_floor, max_norm_over(fx, true_fx), max_norm_over(gy, true_gy),
                          max_norm_over(g_on_true, id_src), max_norm_over(f_on_true, id_dst)});
    r.composition_error_fwd = max_norm_over(gfx, xs);
    r.composition_error_bwd = max_norm_over(fgy, ys);

    auto df = maps.df ? maps.df : [f = maps.f](const Vector& x) { return finite_difference_jacobian(f, x); };
    auto dg = maps.dg ? maps.dg : [g = maps.g](const Vector& y) { return finite_difference_jacobian(g, y); };
    r.lipschitz_g = max_operator_norm(dg, ys, fx);
    r.lipschitz_f = max_operator_norm(df, xs, gy);
    r.bound_fwd = (1.0 + r.lipschitz_g) * r.fit_eps;
    r.bound_bwd = (1.0 + r.lipschitz_f) * r.fit_eps;
    r.bound_ok = r.composition_error_fwd <= r.bound_fwd && r.composition_error_bwd <= r.bound_bwd;

    const PointCloud fx_cloud = PointCloud::from_points(fx), gy_cloud = PointCloud::from_points(gy);
    r.hausdorff_forward = hausdorff(fx_cloud, ys_cloud);
    r.hausdorff_backward = hausdorff(gy_cloud, xs_cloud);
    r.target_fineness = net_fineness(ys_cloud);
    r.source_fineness = net_fineness(xs_cloud);
    return r;
}

CycleReport evaluate_cycle(const CyclePair& pair, std::size_t sample_count, std::uint64_t seed) {
    CycleMaps maps;
    maps.f = [&net = pair.forward_net](const Vector& x) { return forward(net, x); };
    maps.g = [&net = pair.backward_net](const Vector& y) { return forward(net, y); };
    maps.df = [&net = pair.forward_net](const Vector& x) { return jacobian(net, x); };
    maps.dg = [&net = pair.backward_net](const Vector& y) { return jacobian(net, y); };
    return evaluate_cycle_maps(maps, pair.source, pair.target, sample_count, seed, pair.fit_eps);
}

} // namespace mangen
