#include "mangen/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mangen::catalog {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
    double x = std::fmod(a, kTwoPi);
    if (x < 0.0) x += kTwoPi;
    if (x >= kTwoPi) x = 0.0;
    return x;
}

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

} // namespace

EmbeddedManifold circle(double radius) {
    EmbeddedManifold m;
    m.id = "circle";
    m.dim = 1;
    m.ambient_dim = 2;
    m.chart_domain = Box{vec({0.0}), vec({kTwoPi})};
    m.periodic = {true};
    m.embedding = [](const ChartPoint& p) { return vec({std::cos(p[0]), std::sin(p[0])}); };
    m.analytic_jacobian = [](const ChartPoint& p) {
        Matrix j(2, 1);
        j << -std::sin(p[0]), std::cos(p[0]);
        return j;
    };
    // unit speed in the chart is unit speed on the curve, so geodesics are angle addition
    m.analytic_exp = [](const ChartPoint& p, const Vector& v) {
        return vec({std::cos(p[0] + v[0]), std::sin(p[0] + v[0])});
    };
    m.chart_inverse = [](const AmbientPoint& x) { return vec({wrap_angle(std::atan2(x[1], x[0]))}); };
    m.analytic_metric = [](const ChartPoint&) { return Matrix::Identity(1, 1); };
    m.analytic_christoffel = [](const ChartPoint&) { return ChristoffelSymbols(1); };
    m.analytic_diameter = kPi;
    m.analytic_volume = kTwoPi;
    if (radius != 1.0) return transformed(m, radius, Vector::Zero(2));
    return m;
}

EmbeddedManifold sphere() {
    EmbeddedManifold m;
    m.id = "sphere";
    m.dim = 2;
    m.ambient_dim = 3;
    m.singular_margin = kPoleMargin;
    m.chart_domain = Box{vec({kPoleMargin, 0.0}), vec({kPi - kPoleMargin, kTwoPi})};
    m.periodic = {false, true};
    m.embedding = [](const ChartPoint& p) {
        const double st = std::sin(p[0]);
        return vec({st * std::cos(p[1]), st * std::sin(p[1]), std::cos(p[0])});
    };
    m.analytic_jacobian = [](const ChartPoint& p) {
        const double st = std::sin(p[0]), ct = std::cos(p[0]);
        const double sp = std::sin(p[1]), cp = std::cos(p[1]);
        Matrix j(3, 2);
        j << ct * cp, -st * sp,
             ct * sp, st * cp,
             -st, 0.0;
        return j;
    };
    // great circle: cos|w| q + sin|w| w/|w| with w the ambient image of v
    m.analytic_exp = [emb = m.embedding, jac = m.analytic_jacobian](const ChartPoint& p, const Vector& v) {
        const Vector q = emb(p);
        const Vector w = jac(p) * v;
        const double speed = w.norm();
        if (speed == 0.0) return q;
        return Vector(std::cos(speed) * q + std::sin(speed) * (w / speed));
    };
    m.chart_inverse = [](const AmbientPoint& x) {
        const double r = x.norm();
        const double c = std::clamp(x[2] / r, -1.0, 1.0);
        return vec({std::acos(c), wrap_angle(std::atan2(x[1], x[0]))});
    };
    m.analytic_metric = [](const ChartPoint& p) {
        Matrix g = Matrix::Zero(2, 2);
        g(0, 0) = 1.0;
        g(1, 1) = std::sin(p[0]) * std::sin(p[0]);
        return g;
    };
    m.analytic_christoffel = [](const ChartPoint& p) {
        ChristoffelSymbols gamma(2);
        const double st = std::sin(p[0]), ct = std::cos(p[0]);
        gamma(0, 1, 1) = -st * ct;
        gamma(1, 0, 1) = ct / st;
        gamma(1, 1, 0) = ct / st;
        return gamma;
    };
    m.analytic_diameter = kPi;
    m.analytic_volume = 4.0 * kPi;
    return m;
}

EmbeddedManifold clifford_torus() {
    EmbeddedManifold m;
    m.id = "clifford-torus";
    m.dim = 2;
    m.ambient_dim = 4;
    m.chart_domain = Box{vec({0.0, 0.0}), vec({kTwoPi, kTwoPi})};
    m.periodic = {true, true};
    m.embedding = [](const ChartPoint& p) {
        return vec({std::cos(p[0]), std::sin(p[0]), std::cos(p[1]), std::sin(p[1])});
    };
    m.analytic_jacobian = [](const ChartPoint& p) {
        Matrix j = Matrix::Zero(4, 2);
        j(0, 0) = -std::sin(p[0]);
        j(1, 0) = std::cos(p[0]);
        j(2, 1) = -std::sin(p[1]);
        j(3, 1) = std::cos(p[1]);
        return j;
    };
    // flat metric: geodesics are straight lines in the chart
    m.analytic_exp = [emb = m.embedding](const ChartPoint& p, const Vector& v) { return emb(p + v); };
    m.chart_inverse = [](const AmbientPoint& x) {
        return vec({wrap_angle(std::atan2(x[1], x[0])), wrap_angle(std::atan2(x[3], x[2]))});
    };
    m.analytic_metric = [](const ChartPoint&) { return Matrix::Identity(2, 2); };
    m.analytic_christoffel = [](const ChartPoint&) { return ChristoffelSymbols(2); };
    m.analytic_diameter = kPi * std::numbers::sqrt2;
    m.analytic_volume = kTwoPi * kTwoPi;
    return m;
}

EmbeddedManifold doughnut_torus(double major, double minor) {
    EmbeddedManifold m;
    m.id = "torus3";
    m.dim = 2;
    m.ambient_dim = 3;
    m.chart_domain = Box{vec({0.0, 0.0}), vec({kTwoPi, kTwoPi})};
    m.periodic = {true, true};
    m.embedding = [major, minor](const ChartPoint& p) {
        const double ring = major + minor * std::cos(p[1]);
        return vec({ring * std::cos(p[0]), ring * std::sin(p[0]), minor * std::sin(p[1])});
    };
    m.analytic_jacobian = [major, minor](const ChartPoint& p) {
        const double ring = major + minor * std::cos(p[1]);
        const double su = std::sin(p[0]), cu = std::cos(p[0]);
        const double sv = std::sin(p[1]), cv = std::cos(p[1]);
        Matrix j(3, 2);
        j << -ring * su, -minor * sv * cu,
             ring * cu, -minor * sv * su,
             0.0, minor * cv;
        return j;
    };
    m.chart_inverse = [major](const AmbientPoint& x) {
        const double rho = std::hypot(x[0], x[1]);
        return vec({wrap_angle(std::atan2(x[1], x[0])), wrap_angle(std::atan2(x[2], rho - major))});
    };
    m.analytic_metric = [major, minor](const ChartPoint& p) {
        const double ring = major + minor * std::cos(p[1]);
        Matrix g = Matrix::Zero(2, 2);
        g(0, 0) = ring * ring;
        g(1, 1) = minor * minor;
        return g;
    };
    m.analytic_christoffel = [major, minor](const ChartPoint& p) {
        ChristoffelSymbols gamma(2);
        const double ring = major + minor * std::cos(p[1]);
        const double sv = std::sin(p[1]);
        gamma(0, 0, 1) = -minor * sv / ring;
        gamma(0, 1, 0) = -minor * sv / ring;
        gamma(1, 0, 0) = ring * sv / minor;
        return gamma;
    };
    m.analytic_volume = 4.0 * kPi * kPi * major * minor;
    return m;
}

EmbeddedManifold transformed(const EmbeddedManifold& base, double scale, const Vector& offset) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("similarity scale must be positive");
    if (offset.size() != base.ambient_dim) throw ShapeError("offset length must equal the ambient dimension");
    EmbeddedManifold m = base;
    m.embedding = [f = base.embedding, scale, offset](const ChartPoint& p) {
        return Vector(scale * f(p) + offset);
    };
    if (base.analytic_jacobian) {
        m.analytic_jacobian = [f = base.analytic_jacobian, scale](const ChartPoint& p) {
            return Matrix(scale * f(p));
        };
    }
    if (base.analytic_exp) {
        // geodesics are unchanged as chart curves; only the time-1 point scales
        m.analytic_exp = [f = base.analytic_exp, scale, offset](const ChartPoint& p, const Vector& v) {
            return Vector(scale * f(p, v) + offset);
        };
    }
    if (base.chart_inverse) {
        m.chart_inverse = [f = base.chart_inverse, scale, offset](const AmbientPoint& x) {
            return f((x - offset) / scale);
        };
    }
    if (base.analytic_metric) {
        m.analytic_metric = [f = base.analytic_metric, scale](const ChartPoint& p) {
            return Matrix(scale * scale * f(p));
        };
    }
    if (base.analytic_diameter) m.analytic_diameter = *base.analytic_diameter * scale;
    if (base.analytic_volume) m.analytic_volume = *base.analytic_volume * std::pow(scale, base.dim);
    return m;
}

EmbeddedManifold by_id(const std::string& id) {
    if (id == "circle") return circle();
    if (id == "sphere") return sphere();
    if (id == "clifford-torus") return clifford_torus();
    if (id == "torus3") return doughnut_torus();
    throw ArgumentError("unknown manifold id '" + id + "' (expected circle, sphere, clifford-torus or torus3)");
}

const std::vector<std::string>& builtin_ids() {
    static const std::vector<std::string> ids = {"circle", "sphere", "clifford-torus", "torus3"};
    return ids;
}

} // namespace mangen::catalog
