#include "mangen/catalog.hpp"
#include "mangen/generator.hpp"
#include "mangen/geodesic.hpp"
#include "mangen/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mangen;
using std::numbers::pi;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

// Closest approach of the great circle through (q, v) to either pole.
double pole_clearance(const EmbeddedManifold& s, const ChartPoint& q, const Vector& v) {
    const Eigen::Vector3d p = embed(s, q).head<3>();
    const Eigen::Vector3d t = (embedding_jacobian(s, q) * v).head<3>();
    return 0.5 * pi - std::acos(std::min(1.0, std::abs(p.cross(t).normalized().z())));
}

// Random (q, v) with |v|_g = speed; sphere draws keep 0.3 rad from the poles.
std::pair<ChartPoint, Vector> draw(const EmbeddedManifold& m, Rng& rng, double speed) {
    while (true) {
        ChartPoint q(m.dim);
        Vector v(m.dim);
        for (int i = 0; i < m.dim; ++i) {
            const double pad = m.is_periodic(i) ? 0.0 : 0.05;
            q[i] = rng.uniform(m.chart_domain.lo[i] + pad, m.chart_domain.hi[i] - pad);
            v[i] = rng.normal();
        }
        v *= speed / metric_norm(m, q, v);
        if (m.id != "sphere" || pole_clearance(m, q, v) >= 0.3) return {q, v};
    }
}

// Great-circle oracle written out here, independent of the catalog closed form.
Vector great_circle(const ChartPoint& q, const Vector& v) {
    const auto s = catalog::sphere();
    const Vector p = embed(s, q);
    const Vector t = embedding_jacobian(s, q) * v;
    const double n = t.norm();
    if (n == 0.0) return p;
    return std::cos(n) * p + std::sin(n) * (t / n);
}

} // namespace

TEST_CASE("circle geodesic is uniform rotation") {
    const auto c = catalog::circle();
    const auto traj = integrate_geodesic(c, v1(5.0), v1(1.5), 2.0, 100);
    REQUIRE(traj.states.size() == 101);
    CHECK(traj.step_size == doctest::Approx(0.02));
    CHECK(traj.states.back().position[0] == doctest::Approx(std::fmod(5.0 + 3.0, 2.0 * pi)).epsilon(1e-12));
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        CHECK(traj.states[i].time > traj.states[i - 1].time);
        CHECK(traj.states[i].position[0] >= 0.0);
        CHECK(traj.states[i].position[0] < 2.0 * pi);
    }
}

TEST_CASE("zero velocity stays put") {
    for (const auto& id : catalog::builtin_ids()) {
        const auto m = catalog::by_id(id);
        const ChartPoint q = m.chart_domain.center();
        const auto traj = integrate_geodesic(m, q, Vector::Zero(m.dim), 1.0, 10);
        CHECK((traj.states.back().position - q).norm() == 0.0);
        CHECK((exp_map(m, q, Vector::Zero(m.dim)) - embed(m, q)).norm() < 1e-15);
        CHECK((numeric_exp_map(m, q, Vector::Zero(m.dim)) - embed(m, q)).norm() < 1e-15);
    }
}

TEST_CASE("sphere equator reaches the antipode at time pi") {
    const auto s = catalog::sphere();
    const auto traj = integrate_geodesic(s, v2(pi / 2, 0.0), v2(0.0, 1.0), pi, 1000);
    CHECK(traj.states.back().position[0] == doctest::Approx(pi / 2).epsilon(1e-10));
    CHECK(traj.states.back().position[1] == doctest::Approx(pi).epsilon(1e-10));
}

TEST_CASE("leaving the sphere chart toward a pole raises an escape error") {
    const auto s = catalog::sphere();
    try {
        integrate_geodesic(s, v2(0.5, 1.0), v2(-1.0, 0.0), 1.0, 100);
        FAIL("expected escape");
    } catch (const EscapeError& e) {
        CHECK(e.exit_time() > 0.45);
        CHECK(e.exit_time() < 0.5);
    }
}

TEST_CASE("exp map examples") {
    const auto c = catalog::circle();
    CHECK((exp_map(c, v1(0.0), v1(pi)) - v2(-1.0, 0.0)).norm() < 1e-15);
    CHECK((numeric_exp_map(c, v1(0.0), v1(pi)) - v2(-1.0, 0.0)).norm() < 1e-12);
    CHECK(exp_map_steps(0.0) == 64);
    CHECK(exp_map_steps(1.0) == 64);
    CHECK(exp_map_steps(2.5) == 160);
}

TEST_CASE("numeric exp matches closed forms for |v| up to 2 pi") {
    Rng rng(21);
    double worst = 0.0;
    for (const char* id : {"circle", "sphere", "clifford-torus"}) {
        const auto m = catalog::by_id(id);
        for (int t = 0; t < 60; ++t) {
            const auto [q, v] = draw(m, rng, 2.0 * pi * rng.uniform());
            const Vector numeric = numeric_exp_map(m, q, v);
            worst = std::max(worst, (numeric - m.analytic_exp(q, v)).norm());
            if (m.id == "sphere") CHECK((numeric - great_circle(q, v)).norm() < 1e-5);
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("speed drift examples") {
    const auto ct = catalog::clifford_torus();
    CHECK(speed_drift(ct, integrate_geodesic(ct, v2(1.0, 2.0), v2(0.7, -2.0), 3.0, 300)) < 1e-12);
    const auto c = catalog::circle();
    CHECK(speed_drift(c, integrate_geodesic(c, v1(1.0), v1(4.0), 3.0, 300)) < 1e-10);
    const auto s = catalog::sphere();
    CHECK(speed_drift(s, integrate_geodesic(s, v2(pi / 2, 0.0), v2(0.0, 1.0), 10.0, 10000)) < 1e-6);
}

TEST_CASE("speed is conserved on 100 random geodesics per manifold at step 1e-3") {
    Rng rng(31);
    for (const auto& id : catalog::builtin_ids()) {
        const auto m = catalog::by_id(id);
        const double diameter = m.analytic_diameter ? *m.analytic_diameter
                                                    : estimate_diameter(m, 2000, 24, 1).graph_diameter;
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const auto [q, v] = draw(m, rng, diameter * rng.uniform());
            worst = std::max(worst, speed_drift(m, integrate_geodesic(m, q, v, 1.0, 1000)));
        }
        CHECK_MESSAGE(worst < 1e-6, id << " drift " << worst);
    }
}

TEST_CASE("RK4 step halving reduces the sphere error by about 16") {
    const auto s = catalog::sphere();
    const ChartPoint q = v2(pi / 2, 0.0);
    const Vector v = v2(0.6, 0.8);
    const Vector exact = great_circle(q, v);
    auto err = [&](int n) { return (embed(s, integrate_geodesic(s, q, v, 1.0, n).states.back().position) - exact).norm(); };
    const double ratio = err(8) / err(16);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
}

TEST_CASE("exp is homogeneous along a geodesic") {
    Rng rng(2);
    for (const char* id : {"sphere", "torus3"}) {
        const auto m = catalog::by_id(id);
        for (int trial = 0; trial < 5; ++trial) {
            const auto [q, v] = draw(m, rng, 2.0);
            const int n = exp_map_steps(2.0);
            const auto traj = integrate_geodesic(m, q, v, 1.0, n);
            for (int k : {n / 4, n / 2, 3 * n / 4}) {
                const double t = static_cast<double>(k) / n;
                CHECK((numeric_exp_map(m, q, t * v) - embed(m, traj.states[static_cast<std::size_t>(k)].position)).norm() < 1e-6);
            }
        }
    }
}

TEST_CASE("torus3 has no closed-form exp, so exp_map integrates") {
    const auto t = catalog::doughnut_torus();
    CHECK(!t.analytic_exp);
    const ChartPoint q = v2(1.0, 2.0);
    const Vector v = v2(0.3, -0.4);
    CHECK((exp_map(t, q, v) - numeric_exp_map(t, q, v)).norm() == 0.0);
}
