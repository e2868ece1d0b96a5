#include "mangen/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mangen {

bool Box::contains(const Vector& p, double slack) const {
    if (p.size() != lo.size()) return false;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
    }
    return true;
}

double Box::measure() const {
    double v = 1.0;
    for (Eigen::Index i = 0; i < lo.size(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
}

Vector ChristoffelSymbols::contract(const Vector& v) const {
    Vector a = Vector::Zero(dim_);
    for (int k = 0; k < dim_; ++k) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
            for (int j = 0; j < dim_; ++j) s += (*this)(k, i, j) * v[i] * v[j];
        }
        a[k] = s;
    }
    return a;
}

double ChristoffelSymbols::max_abs_difference(const ChristoffelSymbols& other) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < gamma_.size(); ++i) {
        worst = std::max(worst, std::abs(gamma_[i] - other.gamma_[i]));
    }
    return worst;
}

namespace detail {

double coordinate_step(double x, double relative) { return relative * std::max(1.0, std::abs(x)); }

Matrix jacobian_unchecked(const EmbeddedManifold& m, const ChartPoint& p) {
    if (m.analytic_jacobian) return m.analytic_jacobian(p);
    Matrix jac(m.ambient_dim, m.dim);
    ChartPoint shifted = p;
    for (int j = 0; j < m.dim; ++j) {
        const double h = coordinate_step(p[j], kJacobianStep);
        shifted[j] = p[j] + h;
        const Vector plus = m.embedding(shifted);
        shifted[j] = p[j] - h;
        const Vector minus = m.embedding(shifted);
        shifted[j] = p[j];
        jac.col(j) = (plus - minus) / (2.0 * h);
    }
    return jac;
}

Matrix metric_unchecked(const EmbeddedManifold& m, const ChartPoint& p) {
    const Matrix jac = jacobian_unchecked(m, p);
    return jac.transpose() * jac;
}

} // namespace detail

void require_in_domain(const EmbeddedManifold& m, const ChartPoint& p, double margin) {
    if (p.size() != m.dim) {
        std::ostringstream os;
        os << m.id << " expects " << m.dim << " chart coordinates, got " << p.size();
        throw ShapeError(os.str());
    }
    for (int i = 0; i < m.dim; ++i) {
        const double lo = m.chart_domain.lo[i];
        const double hi = m.chart_domain.hi[i];
        bool ok = std::isfinite(p[i]);
        if (ok && m.is_periodic(i)) {
            ok = p[i] >= lo && p[i] < hi;
        } else if (ok) {
            ok = p[i] >= lo + margin && p[i] <= hi - margin;
        }
        if (!ok) {
            std::ostringstream os;
            os << "coordinate " << i << " = " << p[i] << " outside chart domain ["
               << lo << ", " << hi << (m.is_periodic(i) ? ")" : "]") << " of " << m.id;
            if (margin > 0.0 && !m.is_periodic(i)) os << " (required interior margin " << margin << ")";
            throw DomainError(os.str());
        }
    }
}

ChartPoint wrap(const EmbeddedManifold& m, ChartPoint p) {
    for (int i = 0; i < m.dim; ++i) {
        if (!m.is_periodic(i)) continue;
        const double lo = m.chart_domain.lo[i];
        const double period = m.chart_domain.hi[i] - lo;
        double x = std::fmod(p[i] - lo, period);
        if (x < 0.0) x += period;
        if (x >= period) x = 0.0;
        p[i] = lo + x;
    }
    return p;
}

AmbientPoint embed(const EmbeddedManifold& m, const ChartPoint& p) {
    require_in_domain(m, p);
    return m.embedding(p);
}

static double max_step(const ChartPoint& p, double relative) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) h = std::max(h, detail::coordinate_step(p[i], relative));
    return h;
}

Matrix embedding_jacobian(const EmbeddedManifold& m, const ChartPoint& p) {
    if (m.analytic_jacobian) {
        require_in_domain(m, p);
        return m.analytic_jacobian(p);
    }
    return numeric_jacobian(m, p);
}

Matrix numeric_jacobian(const EmbeddedManifold& m, const ChartPoint& p) {
    require_in_domain(m, p, p.size() == m.dim ? max_step(p, kJacobianStep) : 0.0);
    Matrix jac(m.ambient_dim, m.dim);
    ChartPoint shifted = p;
    for (int j = 0; j < m.dim; ++j) {
        const double h = detail::coordinate_step(p[j], kJacobianStep);
        shifted[j] = p[j] + h;
        const Vector plus = m.embedding(shifted);
        shifted[j] = p[j] - h;
        const Vector minus = m.embedding(shifted);
        shifted[j] = p[j];
        jac.col(j) = (plus - minus) / (2.0 * h);
    }
    return jac;
}

Matrix metric(const EmbeddedManifold& m, const ChartPoint& p) {
    const Matrix jac = embedding_jacobian(m, p);
    return jac.transpose() * jac;
}

ChristoffelSymbols christoffel(const EmbeddedManifold& m, const ChartPoint& p) {
    const double inner = m.analytic_jacobian ? 0.0 : max_step(p, kJacobianStep);
    require_in_domain(m, p, p.size() == m.dim ? max_step(p, kMetricDerivativeStep) + inner : 0.0);
    const int d = m.dim;

    const Matrix g = detail::metric_unchecked(m, p);
    Eigen::LDLT<Matrix> ldlt(g);
    // Relative test catches anisotropic collapse; the absolute floor catches a
    // uniformly vanishing metric, which no relative test can see in d = 1.
    const double scale = std::max(g.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= std::max(1e-12 * scale, 1e-14)) {
        std::ostringstream os;
        os << "metric of " << m.id << " is singular at chart point (" << p.transpose() << ")";
        throw SingularityError(os.str());
    }
    const Matrix g_inv = ldlt.solve(Matrix::Identity(d, d));

    // dg[l](i, j) = d g_ij / d x^l
    std::vector<Matrix> dg(static_cast<std::size_t>(d));
    ChartPoint shifted = p;
    for (int l = 0; l < d; ++l) {
        const double h = detail::coordinate_step(p[l], kMetricDerivativeStep);
        shifted[l] = p[l] + h;
        const Matrix plus = detail::metric_unchecked(m, shifted);
        shifted[l] = p[l] - h;
        const Matrix minus = detail::metric_unchecked(m, shifted);
        shifted[l] = p[l];
        dg[static_cast<std::size_t>(l)] = (plus - minus) / (2.0 * h);
    }

    ChristoffelSymbols gamma(d);
    for (int k = 0; k < d; ++k) {
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                double s = 0.0;
                for (int l = 0; l < d; ++l) {
                    const double bracket = dg[static_cast<std::size_t>(i)](j, l)
                                         + dg[static_cast<std::size_t>(j)](i, l)
                                         - dg[static_cast<std::size_t>(l)](i, j);
                    s += g_inv(k, l) * bracket;
                }
                gamma(k, i, j) = 0.5 * s;
                gamma(k, j, i) = 0.5 * s;
            }
        }
    }
    return gamma;
}

double metric_norm(const EmbeddedManifold& m, const ChartPoint& p, const Vector& v) {
    const Matrix g = metric(m, p);
    return std::sqrt(std::max(0.0, v.dot(g * v)));
}

double volume_density(const EmbeddedManifold& m, const ChartPoint& p) {
    return std::sqrt(std::max(0.0, detail::metric_unchecked(m, p).determinant()));
}

double volume(const EmbeddedManifold& m, const Box& region, int resolution) {
    if (region.dim() != m.dim) throw ShapeError("volume region dimension does not match " + m.id);
    if (resolution < 1) throw ArgumentError("quadrature resolution must be positive");
    if (!m.chart_domain.contains(region.lo, 1e-12) || !m.chart_domain.contains(region.hi, 1e-12)) {
        for (int i = 0; i < m.dim; ++i) {
            if (region.lo[i] < m.chart_domain.lo[i] - 1e-12 || region.hi[i] > m.chart_domain.hi[i] + 1e-12) {
                std::ostringstream os;
                os << "volume region axis " << i << " [" << region.lo[i] << ", " << region.hi[i]
                   << "] escapes chart domain [" << m.chart_domain.lo[i] << ", "
                   << m.chart_domain.hi[i] << "] of " << m.id;
                throw DomainError(os.str());
            }
        }
    }
    if (region.measure() <= 0.0) return 0.0;

    const int d = m.dim;
    const Vector cell = region.extent() / resolution;
    long long inner_cells = 1;
    for (int i = 1; i < d; ++i) inner_cells *= resolution;

    // One partial sum per slice of axis 0, added in slice order afterwards.
    std::vector<double> partial(static_cast<std::size_t>(resolution), 0.0);
#pragma omp parallel for schedule(static)
    for (int i0 = 0; i0 < resolution; ++i0) {
        ChartPoint x(d);
        x[0] = region.lo[0] + (i0 + 0.5) * cell[0];
        double s = 0.0;
        for (long long flat = 0; flat < inner_cells; ++flat) {
            long long rest = flat;
            for (int axis = 1; axis < d; ++axis) {
                const long long idx = rest % resolution;
                rest /= resolution;
                x[axis] = region.lo[axis] + (static_cast<double>(idx) + 0.5) * cell[axis];
            }
            s += volume_density(m, x);
        }
        partial[static_cast<std::size_t>(i0)] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total * cell.prod();
}

double total_volume(const EmbeddedManifold& m, int resolution) {
    if (m.analytic_volume) return *m.analytic_volume;
    return volume(m, m.chart_domain, resolution);
}

} // namespace mangen
