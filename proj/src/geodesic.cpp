#include "mangen/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mangen {

namespace {

// Interior margin needed on non-periodic axes for the Christoffel stencil.
double stencil_margin(const EmbeddedManifold& m, const ChartPoint& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        h = std::max(h, detail::coordinate_step(p[i], kMetricDerivativeStep));
        if (!m.analytic_jacobian) h += detail::coordinate_step(p[i], kJacobianStep);
    }
    return h;
}

void require_inside(const EmbeddedManifold& m, const ChartPoint& p, double time) {
    const double margin = stencil_margin(m, p);
    for (int i = 0; i < m.dim; ++i) {
        if (m.is_periodic(i)) continue;
        if (!std::isfinite(p[i]) || p[i] < m.chart_domain.lo[i] + margin || p[i] > m.chart_domain.hi[i] - margin) {
            std::ostringstream os;
            os << "geodesic on " << m.id << " leaves the chart domain along axis " << i << " at t = " << time;
            throw EscapeError(os.str(), time);
        }
    }
}

Vector acceleration(const EmbeddedManifold& m, const ChartPoint& q, const Vector& v, double time) {
    const ChartPoint wrapped = wrap(m, q);
    require_inside(m, wrapped, time);
    return -christoffel(m, wrapped).contract(v);
}

} // namespace

GeodesicTrajectory integrate_geodesic(const EmbeddedManifold& m, const ChartPoint& q0, const Vector& v0,
                                      double total_time, int steps) {
    if (steps < 1) throw ArgumentError("geodesic integration needs at least one step");
    if (!std::isfinite(total_time)) throw ArgumentError("geodesic integration time must be finite");
    if (v0.size() != m.dim) throw ShapeError("initial velocity must have " + std::to_string(m.dim) + " components");
    require_in_domain(m, q0);
    require_inside(m, q0, 0.0);

    GeodesicTrajectory traj;
    traj.step_size = total_time / steps;
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.push_back({q0, v0, 0.0});

    const double h = traj.step_size;
    ChartPoint q = q0;
    Vector v = v0;
    for (int n = 0; n < steps; ++n) {
        const double t = n * h;
        const double t_end = (n + 1) * h;
        const Vector k1q = v;
        const Vector k1v = acceleration(m, q, v, t);
        const Vector k2q = v + 0.5 * h * k1v;
        const Vector k2v = acceleration(m, q + 0.5 * h * k1q, k2q, t_end);
        const Vector k3q = v + 0.5 * h * k2v;
        const Vector k3v = acceleration(m, q + 0.5 * h * k2q, k3q, t_end);
        const Vector k4q = v + h * k3v;
        const Vector k4v = acceleration(m, q + h * k3q, k4q, t_end);
        q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        q = wrap(m, q);
        require_inside(m, q, t_end);
        traj.states.push_back({q, v, t_end});
    }
    return traj;
}

int exp_map_steps(double metric_speed) {
    return std::max(64, static_cast<int>(std::ceil(64.0 * metric_speed)));
}

AmbientPoint exp_map(const EmbeddedManifold& m, const ChartPoint& q, const Vector& v) {
    if (m.analytic_exp) {
        require_in_domain(m, q);
        if (v.size() != m.dim) throw ShapeError("tangent vector must have " + std::to_string(m.dim) + " components");
        return m.analytic_exp(q, v);
    }
    return numeric_exp_map(m, q, v);
}

AmbientPoint numeric_exp_map(const EmbeddedManifold& m, const ChartPoint& q, const Vector& v) {
    const double speed = metric_norm(m, q, v);
    const auto traj = integrate_geodesic(m, q, v, 1.0, exp_map_steps(speed));
    return m.embedding(traj.states.back().position);
}

double speed_drift(const EmbeddedManifold& m, const GeodesicTrajectory& trajectory) {
    if (trajectory.states.empty()) throw ArgumentError("speed drift of an empty trajectory");
    const auto& first = trajectory.states.front();
    const double initial = metric_norm(m, first.position, first.velocity);
    double drift = 0.0;
    for (const auto& s : trajectory.states) {
        drift = std::max(drift, std::abs(metric_norm(m, s.position, s.velocity) - initial));
    }
    return drift;
}

} // namespace mangen
