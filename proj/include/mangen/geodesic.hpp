#pragma once

#include "mangen/manifold.hpp"

#include <vector>

namespace mangen {

struct GeodesicState {
    ChartPoint position;
    Vector velocity;  // chart components
    double time = 0.0;
};

/// States at times 0, h, 2h, ..., steps*h.
struct GeodesicTrajectory {
    std::vector<GeodesicState> states;
    double step_size = 0.0;
};

/// Fixed-step classical RK4 on q' = v, v'^k = -Gamma^k_ij v^i v^j. Periodic
/// axes are wrapped after every step; leaving a non-periodic axis throws
/// EscapeError carrying the time of the offending step.
GeodesicTrajectory integrate_geodesic(const EmbeddedManifold& m, const ChartPoint& q0, const Vector& v0,
                                      double total_time, int steps);

/// Step count used by the exponential map: max(64, ceil(64 |v|_g)).
int exp_map_steps(double metric_speed);

/// exp_q(v) in ambient coordinates; the closed form when the manifold has one.
AmbientPoint exp_map(const EmbeddedManifold& m, const ChartPoint& q, const Vector& v);
/// exp_q(v) by integrating the geodesic equation, ignoring any closed form.
AmbientPoint numeric_exp_map(const EmbeddedManifold& m, const ChartPoint& q, const Vector& v);

/// max over states of | |v|_g - |v0|_g0 |.
double speed_drift(const EmbeddedManifold& m, const GeodesicTrajectory& trajectory);

} // namespace mangen
