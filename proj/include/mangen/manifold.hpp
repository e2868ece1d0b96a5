#pragma once

#include "mangen/core.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mangen {

/// Chart coordinates (d entries) and ambient coordinates (n entries).
using ChartPoint = Vector;
using AmbientPoint = Vector;

/// Axis-aligned box [lo, hi] in some coordinate space.
struct Box {
    Vector lo;
    Vector hi;

    int dim() const { return static_cast<int>(lo.size()); }
    Vector center() const { return 0.5 * (lo + hi); }
    Vector extent() const { return hi - lo; }
    bool contains(const Vector& p, double slack = 0.0) const;
    /// Euclidean (coordinate) volume.
    double measure() const;
};

/// Christoffel symbols of the second kind, Gamma^k_{ij}, stored k-major.
class ChristoffelSymbols {
public:
    explicit ChristoffelSymbols(int dim) : dim_(dim), gamma_(dim * dim * dim, 0.0) {}

    int dim() const { return dim_; }
    double& operator()(int k, int i, int j) { return gamma_[(k * dim_ + i) * dim_ + j]; }
    double operator()(int k, int i, int j) const { return gamma_[(k * dim_ + i) * dim_ + j]; }
    /// Evaluates a^k = Gamma^k_{ij} v^i v^j.
    Vector contract(const Vector& v) const;
    double max_abs_difference(const ChristoffelSymbols& other) const;

private:
    int dim_;
    std::vector<double> gamma_;
};

/// A compact manifold given by a single chart and a smooth embedding into R^n.
///
/// Periodic chart axes live on half-open intervals [lo, hi); callers wrap them.
/// Non-periodic axes are closed intervals that already exclude a band of width
/// `singular_margin` around coordinate singularities. Optional members are
/// closed-form oracles; empty functions mean "not available".
struct EmbeddedManifold {
    std::string id;
    int dim = 0;
    int ambient_dim = 0;
    Box chart_domain;
    std::vector<bool> periodic;
    double singular_margin = 0.0;

    std::function<AmbientPoint(const ChartPoint&)> embedding;
    std::function<Matrix(const ChartPoint&)> analytic_jacobian;
    /// (base point, chart-coordinate tangent vector) -> exp in ambient space.
    std::function<AmbientPoint(const ChartPoint&, const Vector&)> analytic_exp;
    /// Ambient point -> chart coordinates. Defined on a neighbourhood of the
    /// manifold so it doubles as an extension of chart maps off the surface.
    std::function<ChartPoint(const AmbientPoint&)> chart_inverse;
    std::function<Matrix(const ChartPoint&)> analytic_metric;
    std::function<ChristoffelSymbols(const ChartPoint&)> analytic_christoffel;
    std::optional<double> analytic_diameter;
    std::optional<double> analytic_volume;

    bool is_periodic(int axis) const { return periodic[static_cast<std::size_t>(axis)]; }
};

inline constexpr double kJacobianStep = 1e-5;
inline constexpr double kMetricDerivativeStep = 1e-4;

/// Throws DomainError naming the first coordinate outside the chart domain.
void require_in_domain(const EmbeddedManifold& m, const ChartPoint& p, double margin = 0.0);
/// Maps periodic coordinates into [lo, hi); other coordinates are untouched.
ChartPoint wrap(const EmbeddedManifold& m, ChartPoint p);

AmbientPoint embed(const EmbeddedManifold& m, const ChartPoint& p);
/// n x d; column j is the derivative of the embedding along chart axis j.
Matrix embedding_jacobian(const EmbeddedManifold& m, const ChartPoint& p);
/// Central-difference Jacobian even when an analytic one exists.
Matrix numeric_jacobian(const EmbeddedManifold& m, const ChartPoint& p);
/// Pullback metric J^T J.
Matrix metric(const EmbeddedManifold& m, const ChartPoint& p);
ChristoffelSymbols christoffel(const EmbeddedManifold& m, const ChartPoint& p);

double metric_norm(const EmbeddedManifold& m, const ChartPoint& p, const Vector& v);
/// sqrt(det g) at p.
double volume_density(const EmbeddedManifold& m, const ChartPoint& p);
/// Midpoint quadrature of the volume density over `region` with `resolution`
/// cells per axis.
double volume(const EmbeddedManifold& m, const Box& region, int resolution);
/// Total Riemannian volume; uses the closed form when the manifold has one.
double total_volume(const EmbeddedManifold& m, int resolution);

namespace detail {
// Unchecked evaluations for use inside finite-difference stencils.
Matrix jacobian_unchecked(const EmbeddedManifold& m, const ChartPoint& p);
Matrix metric_unchecked(const EmbeddedManifold& m, const ChartPoint& p);
double coordinate_step(double x, double relative);
} // namespace detail

} // namespace mangen
