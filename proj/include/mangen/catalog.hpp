#pragma once

#include "mangen/manifold.hpp"

#include <string>
#include <vector>

namespace mangen::catalog {

inline constexpr double kPoleMargin = 1e-2;

/// Circle of the given radius in R^2, chart angle in [0, 2pi).
EmbeddedManifold circle(double radius = 1.0);
/// Unit sphere in R^3; theta in [margin, pi - margin], phi in [0, 2pi).
EmbeddedManifold sphere();
/// Flat torus (cos u, sin u, cos v, sin v) in R^4; the pullback metric is I.
EmbeddedManifold clifford_torus();
/// Doughnut torus in R^3 with tube centre radius R and tube radius r.
EmbeddedManifold doughnut_torus(double major = 2.0, double minor = 0.5);

/// Similarity-transformed copy: x -> scale * x + offset.
EmbeddedManifold transformed(const EmbeddedManifold& m, double scale, const Vector& offset);

/// "circle", "sphere", "clifford-torus", "torus3".
EmbeddedManifold by_id(const std::string& id);
const std::vector<std::string>& builtin_ids();

} // namespace mangen::catalog
