#include "mangen/multiclass.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mangen {

namespace {

using Rational = boost::multiprecision::cpp_rational;

Rational exact_from_double(double x) {
    int exponent = 0;
    const double mantissa = std::frexp(x, &exponent);
    // mantissa * 2^53 is an exact integer for any finite double
    const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
    Rational r(scaled);
    exponent -= 53;
    Rational two_pow = 1;
    for (int i = 0; i < std::abs(exponent); ++i) two_pow *= 2;
    if (exponent >= 0) return Rational(r * two_pow);
    return Rational(r / two_pow);
}

std::string to_string(const Rational& r) {
    std::ostringstream os;
    os << boost::multiprecision::numerator(r) << '/' << boost::multiprecision::denominator(r);
    return os.str();
}

} // namespace

double SlabPartition::removed_measure() const {
    double kept = 0.0;
    for (const Box& b : slabs) kept += b.hi[0] - b.lo[0];
    return 1.0 - kept / 2.0;
}

SlabPartition build_multiclass_partition(int class_count, double delta, int dim) {
    if (class_count < 2) throw ArgumentError("multiclass partition needs at least 2 classes");
    if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("multiclass delta must lie in (0, 1)");
    if (dim < 1) throw ArgumentError("latent dimension must be positive");

    SlabPartition p;
    p.class_count = class_count;
    p.dim = dim;
    p.delta = delta;
    p.gap_half_width = delta / (2.0 * (class_count - 1));
    const double h = p.gap_half_width;
    for (int i = 0; i <= class_count; ++i) p.breakpoints.push_back(-1.0 + 2.0 * i / class_count);

    for (int i = 0; i < class_count; ++i) {
        Box b{Vector::Constant(dim, -1.0), Vector::Constant(dim, 1.0)};
        b.lo[0] = p.breakpoints[static_cast<std::size_t>(i)] + (i == 0 ? 0.0 : h);
        b.hi[0] = p.breakpoints[static_cast<std::size_t>(i) + 1] - (i == class_count - 1 ? 0.0 : h);
        if (!(b.hi[0] > b.lo[0])) {
            std::ostringstream os;
            os << "gap half-width " << h << " leaves no room for slab " << i << " of interval length "
               << 2.0 / class_count;
            throw InfeasibleError(os.str());
        }
        p.slabs.push_back(b);
    }
    return p;
}

ExactMeasureCheck check_partition_measure_exact(int class_count, double delta) {
    if (class_count < 2) throw ArgumentError("multiclass partition needs at least 2 classes");
    const Rational d = exact_from_double(delta);
    const Rational h = d / (2 * (class_count - 1));
    Rational kept = 0;
    for (int i = 0; i < class_count; ++i) {
        const Rational left = Rational(-1) + Rational(2 * i, class_count) + (i == 0 ? Rational(0) : h);
        const Rational right =
            Rational(-1) + Rational(2 * (i + 1), class_count) - (i == class_count - 1 ? Rational(0) : h);
        kept += right - left;
    }
    const Rational removed = Rational(1) - kept / 2;
    ExactMeasureCheck out;
    out.removed_measure = to_string(removed);
    out.half_delta = to_string(d / 2);
    out.equals_half_delta = removed == d / 2;
    out.within_delta = removed <= d;
    return out;
}

MulticlassMap::MulticlassMap(SlabPartition partition, std::vector<GeneratorMap> generators)
    : partition_(std::move(partition)), generators_(std::move(generators)) {
    if (static_cast<int>(generators_.size()) != partition_.class_count) {
        throw ArgumentError("multiclass map needs exactly one generator per slab");
    }
    for (const auto& g : generators_) {
        if (g.latent_dim() != partition_.dim) throw ShapeError("generator latent dimension differs from the partition's");
        if (g.manifold().ambient_dim != generators_.front().manifold().ambient_dim) {
            throw ShapeError("all class manifolds must share one ambient dimension");
        }
    }
}

int MulticlassMap::slab_of(const Vector& z) const {
    for (int i = 0; i < partition_.class_count; ++i) {
        const Box& b = partition_.slabs[static_cast<std::size_t>(i)];
        if (z[0] >= b.lo[0] && z[0] <= b.hi[0]) return i;
    }
    return -1;
}

Vector MulticlassMap::from_slab_latent(int slab, const Vector& local) const {
    const Box& b = partition_.slabs[static_cast<std::size_t>(slab)];
    Vector z = local;
    z[0] = b.lo[0] + (local[0] + 1.0) * 0.5 * (b.hi[0] - b.lo[0]);
    return z;
}

Vector MulticlassMap::to_slab_latent(int slab, const Vector& z) const {
    const Box& b = partition_.slabs[static_cast<std::size_t>(slab)];
    Vector local = z;
    local[0] = std::clamp(-1.0 + 2.0 * (z[0] - b.lo[0]) / (b.hi[0] - b.lo[0]), -1.0, 1.0);
    return local;
}

AmbientPoint MulticlassMap::operator()(const Vector& z) const {
    if (z.size() != partition_.dim) throw ShapeError("latent point has the wrong dimension");
    const int slab = slab_of(z);
    if (slab >= 0) return generators_[static_cast<std::size_t>(slab)](to_slab_latent(slab, z));

    // gap between slab i (right face) and slab i + 1 (left face)
    int i = 0;
    while (i + 1 < partition_.class_count && z[0] > partition_.slabs[static_cast<std::size_t>(i) + 1].lo[0]) ++i;
    const double left_face = partition_.slabs[static_cast<std::size_t>(i)].hi[0];
    const double right_face = partition_.slabs[static_cast<std::size_t>(i) + 1].lo[0];
    const double t = (z[0] - left_face) / (right_face - left_face);
    Vector on_left = z, on_right = z;
    on_left[0] = 1.0;
    on_right[0] = -1.0;
    const AmbientPoint a = generators_[static_cast<std::size_t>(i)](on_left);
    const AmbientPoint b = generators_[static_cast<std::size_t>(i) + 1](on_right);
    return (1.0 - t) * a + t * b;
}

ContinuityReport check_continuity(const MulticlassMap& map, int samples_per_face, double spacing) {
    if (samples_per_face < 1 || !(spacing > 0.0)) throw ArgumentError("continuity check needs samples and a spacing");
    const auto& part = map.partition();
    const int d = part.dim;
    constexpr double kQuotientStep = 1e-4;

    std::vector<double> faces;
    for (int i = 0; i + 1 < part.class_count; ++i) {
        faces.push_back(part.slabs[static_cast<std::size_t>(i)].hi[0]);
        faces.push_back(part.slabs[static_cast<std::size_t>(i) + 1].lo[0]);
    }

    ContinuityReport rep;
    rep.spacing = spacing;
    for (double face : faces) {
        for (int s = 0; s < samples_per_face; ++s) {
            Vector z = Vector::Zero(d);
            z[0] = face;
            // spread the probes over the remaining axes
            for (int a = 1; a < d; ++a) {
                const double u = samples_per_face == 1 ? 0.5 : static_cast<double>(s) / (samples_per_face - 1);
                z[a] = -1.0 + 2.0 * std::fmod(u * (a == 1 ? 1.0 : 0.6180339887498949 * a) + (a == 1 ? 0.0 : 0.5), 1.0);
            }
            const AmbientPoint at = map(z);
            for (double dir : {-1.0, 1.0}) {
                Vector near = z;
                near[0] = face + dir * spacing;
                rep.max_jump = std::max(rep.max_jump, (map(near) - at).norm());
                Vector far = z;
                far[0] = face + dir * kQuotientStep;
                rep.lipschitz = std::max(rep.lipschitz, (map(far) - at).norm() / kQuotientStep);
            }
        }
    }
    rep.allowed = 1e-9 + rep.lipschitz * spacing;
    rep.continuous = rep.max_jump < rep.allowed;
    return rep;
}

} // namespace mangen
