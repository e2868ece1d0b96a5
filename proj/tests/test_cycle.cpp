#include "mangen/catalog.hpp"
#include "mangen/cycle.hpp"
#include "mangen/manifold.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mangen;
using std::numbers::pi;

namespace {

double kept_volume(const ChartSubset& s) { return volume(s.manifold, s.kept, 2 * s.quadrature_resolution); }

ChartSubset whole(const EmbeddedManifold& m) {
    Box b = m.chart_domain;
    for (int i = 0; i < m.dim; ++i) {
        if (!m.is_periodic(i)) continue;
        const double w = 1e-3 * (b.hi[i] - b.lo[i]);
        b.lo[i] += w;
        b.hi[i] -= w;
    }
    return chart_subset_from_box(m, b);
}

double max_roundtrip(const ChartSubset& src, const ChartSubset& dst, std::size_t n) {
    const Diffeo d = ground_truth_diffeo(src, dst);
    const PointCloud xs = sample_subset(src, n, 1);
    const PointCloud ys = sample_subset(dst, n, 2);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, (d.inverse(d.forward(xs.row(i))) - xs.row(i)).norm());
        worst = std::max(worst, (d.forward(d.inverse(ys.row(i))) - ys.row(i)).norm());
    }
    return worst;
}

} // namespace

TEST_CASE("circle subset keeps at least the complement of delta") {
    const auto c = catalog::circle();
    const double delta = 0.1 * 2.0 * pi;
    const auto s = build_chart_subset(c, delta);
    CHECK(s.kept.hi[0] - s.kept.lo[0] >= 0.9 * 2.0 * pi);
    CHECK(s.measure_deficit <= delta);
    CHECK(s.measure_deficit <= 0.95 * delta + 1e-12);
    CHECK(kept_volume(s) >= 2.0 * pi - delta);
    CHECK(s.kept.lo[0] > 0.0);
    CHECK(s.kept.hi[0] < 2.0 * pi);
}

TEST_CASE("delta bounds") {
    const auto c = catalog::circle();
    CHECK(build_chart_subset(c, 0.999 * 2.0 * pi).measure_deficit < 0.999 * 2.0 * pi);
    CHECK_THROWS_AS(build_chart_subset(c, 2.0 * pi), ArgumentError);
    CHECK_THROWS_AS(build_chart_subset(c, 0.0), ArgumentError);
    CHECK_THROWS_AS(build_chart_subset(c, 0.005), PrecisionError);  // the slit alone removes 2 pi * 1e-3
}

TEST_CASE("sphere subset") {
    const auto s = catalog::sphere();
    const double delta = 0.05 * 4.0 * pi;
    const auto sub = build_chart_subset(s, delta);
    CHECK(sub.measure_deficit <= delta);
    CHECK(kept_volume(sub) >= 4.0 * pi - delta - 1e-3);
    CHECK(sub.radius_param > 0.0);
    CHECK(sub.radius_param <= 1.0);
}

TEST_CASE("deficit agrees with a doubled quadrature to 1% of delta") {
    for (const auto& id : catalog::builtin_ids()) {
        const auto m = catalog::by_id(id);
        const double total = total_volume(m, 256);
        for (double frac : {0.05, 0.2}) {
            const double delta = frac * total;
            const auto s = build_chart_subset(m, delta);
            const auto fine = chart_subset_from_box(m, s.kept, 2 * s.quadrature_resolution);
            CHECK_MESSAGE(std::abs(fine.measure_deficit - s.measure_deficit) <= 0.01 * delta, id);
        }
    }
}

TEST_CASE("normalize and denormalize invert each other") {
    const auto s = build_chart_subset(catalog::sphere(), 0.5);
    ChartPoint p(2);
    p << 1.0, 2.0;
    CHECK((s.denormalize(s.normalize(p)) - p).norm() < 1e-14);
    CHECK((s.normalize(s.kept.lo)).norm() < 1e-15);
    CHECK((s.normalize(s.kept.hi) - Vector::Ones(2)).norm() < 1e-15);
}

TEST_CASE("ground-truth diffeo round trips on the sphere and on every same-chart pair") {
    const auto sphere = build_chart_subset(catalog::sphere(), 0.05 * 4.0 * pi);
    const auto big = build_chart_subset(catalog::transformed(catalog::sphere(), 3.0, Vector::Ones(3)), 0.05 * 36.0 * pi);
    CHECK(max_roundtrip(sphere, big, 1000) < 1e-10);

    const auto [c1, c2] = build_aligned_subsets(catalog::circle(), catalog::circle(2.0), 0.5);
    CHECK(max_roundtrip(c1, c2, 1000) < 1e-10);
    const auto [t1, t2] = build_aligned_subsets(catalog::clifford_torus(), catalog::doughnut_torus(), 1.0);
    CHECK(max_roundtrip(t1, t2, 1000) < 1e-10);
    const auto [t3, t4] = build_aligned_subsets(catalog::doughnut_torus(), catalog::clifford_torus(), 1.0);
    CHECK(max_roundtrip(t3, t4, 1000) < 1e-10);
}

TEST_CASE("same subset gives the identity") {
    const auto s = build_chart_subset(catalog::doughnut_torus(), 1.0);
    const Diffeo d = ground_truth_diffeo(s, s);
    const auto xs = sample_subset(s, 200, 3);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK((d.forward(xs.row(i)) - xs.row(i)).norm() < 1e-12);
}

TEST_CASE("circle to the doubled circle scales by two on a shared box") {
    const auto c1 = whole(catalog::circle());
    const auto c2 = chart_subset_from_box(catalog::circle(2.0), c1.kept);
    const Diffeo d = ground_truth_diffeo(c1, c2);
    const auto xs = sample_subset(c1, 300, 4);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK((d.forward(xs.row(i)) - 2.0 * xs.row(i)).norm() < 1e-12);
    CHECK(c2.measure_deficit == doctest::Approx(2.0 * c1.measure_deficit).epsilon(1e-9));
}

TEST_CASE("aligned subsets need matching charts") {
    CHECK_THROWS_AS(build_aligned_subsets(catalog::circle(), catalog::sphere(), 0.5), ArgumentError);
    const auto c = build_chart_subset(catalog::circle(), 0.5);
    const auto s = build_chart_subset(catalog::sphere(), 0.5);
    CHECK_THROWS_AS(ground_truth_diffeo(c, s), ArgumentError);
}

TEST_CASE("exact maps give a tight report") {
    const auto [src, dst] = build_aligned_subsets(catalog::circle(), catalog::circle(2.0), 0.5);
    const Diffeo d = ground_truth_diffeo(src, dst);
    const auto rep = evaluate_cycle_maps({d.forward, d.inverse, {}, {}}, src, dst, 1000, 5);
    CHECK(rep.composition_error_fwd < 1e-9);
    CHECK(rep.composition_error_bwd < 1e-9);
    CHECK(rep.fit_eps < 1e-9);
    CHECK(rep.lipschitz_f == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(rep.lipschitz_g == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(rep.hausdorff_forward <= rep.target_fineness + 1e-9);
    // both sides of the bound are pure rounding here
    CHECK(rep.composition_error_fwd <= rep.bound_fwd + 1e-12);
    CHECK(rep.sample_count == 1000);
}

TEST_CASE("finite-difference jacobian of a linear map") {
    Matrix a(2, 3);
    a << 1, 2, 3, -1, 0, 4;
    const PointMap f = [&](const Vector& x) -> Vector { return a * x; };
    CHECK((finite_difference_jacobian(f, Vector::Ones(3)) - a).norm() < 1e-8);
}

TEST_CASE("a linear net learns the identity task") {
    const auto s = build_chart_subset(catalog::circle(), 0.5);
    CycleTrainOptions opt;
    opt.hidden = {};
    opt.train_samples = 256;
    opt.held_out = 128;
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.seed = 1;
    const auto pair = train_cycle(s, s, opt, cfg);
    CHECK(pair.fit_eps < 1e-3);
    CHECK(pair.fit_eps == std::max(pair.fit_eps_forward, pair.fit_eps_backward));
    const auto rep = evaluate_cycle(pair, 500, 2);
    CHECK(rep.composition_error_fwd < 1e-2);
    CHECK(rep.fit_eps >= pair.fit_eps);
}

TEST_CASE("zero-epoch training still yields a finite report") {
    const auto [src, dst] = build_aligned_subsets(catalog::circle(), catalog::circle(2.0), 0.5);
    CycleTrainOptions opt;
    opt.hidden = {8};
    opt.train_samples = 64;
    opt.held_out = 32;
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto pair = train_cycle(src, dst, opt, cfg);
    CHECK(pair.forward_loss.size() == 1);
    const auto rep = evaluate_cycle(pair, 100, 1);
    for (double v : {rep.hausdorff_forward, rep.hausdorff_backward, rep.composition_error_fwd, rep.fit_eps,
                     rep.lipschitz_f, rep.lipschitz_g, rep.bound_fwd})
        CHECK(std::isfinite(v));
    CHECK(rep.bound_fwd == doctest::Approx((1.0 + rep.lipschitz_g) * rep.fit_eps));
}

TEST_CASE("training argument checks") {
    const auto s = build_chart_subset(catalog::circle(), 0.5);
    CycleTrainOptions opt;
    opt.train_samples = 0;
    CHECK_THROWS_AS(train_cycle(s, s, opt, TrainConfig{}), ArgumentError);
    opt = {};
    opt.tube_width = -1.0;
    CHECK_THROWS_AS(train_cycle(s, s, opt, TrainConfig{}), ArgumentError);
    const auto t = build_chart_subset(catalog::sphere(), 0.5);
    CHECK_THROWS_AS(evaluate_cycle_maps({[](const Vector& x) { return x; }, [](const Vector& x) { return x; }, {}, {}},
                                        s, t, 1, 1),
                    ArgumentError);
}
