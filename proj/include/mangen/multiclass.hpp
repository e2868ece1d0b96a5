#pragma once

#include "mangen/generator.hpp"

#include <string>
#include <vector>

namespace mangen {

/// Decomposition of I_d into c slabs along the first axis, separated by gaps
/// of width 2h with h = delta / (2(c - 1)).
struct SlabPartition {
    int class_count = 0;
    int dim = 0;
    double delta = 0.0;
    double gap_half_width = 0.0;
    std::vector<double> breakpoints;  // x_0 = -1 < x_1 < ... < x_c = 1
    std::vector<Box> slabs;

    /// Normalised (total mass 1) Lebesgue measure of I_d minus the slabs.
    double removed_measure() const;
};

SlabPartition build_multiclass_partition(int class_count, double delta, int dim);

/// Result of redoing the partition arithmetic in exact rationals, with delta
/// taken as the exact binary value of the double.
struct ExactMeasureCheck {
    std::string removed_measure;  // "p/q"
    std::string half_delta;       // "p/q"
    bool equals_half_delta = false;
    bool within_delta = false;
};
ExactMeasureCheck check_partition_measure_exact(int class_count, double delta);

/// Continuous map on I_d: generator i on slab i (first axis renormalised to
/// [-1, 1]) and linear interpolation between neighbouring face images across
/// each gap.
class MulticlassMap {
public:
    MulticlassMap(SlabPartition partition, std::vector<GeneratorMap> generators);

    AmbientPoint operator()(const Vector& z) const;

    /// Slab index containing z, or -1 when z lies in a gap.
    int slab_of(const Vector& z) const;
    /// Latent of slab i (first axis in [-1, 1]) -> point of D_i, and back.
    Vector from_slab_latent(int slab, const Vector& local) const;
    Vector to_slab_latent(int slab, const Vector& z) const;

    const SlabPartition& partition() const { return partition_; }
    const GeneratorMap& generator(int i) const { return generators_[static_cast<std::size_t>(i)]; }
    int ambient_dim() const { return generators_.front().manifold().ambient_dim; }

private:
    SlabPartition partition_;
    std::vector<GeneratorMap> generators_;
};

struct ContinuityReport {
    double max_jump = 0.0;       // largest |F(face) - F(face +- spacing)|
    double lipschitz = 0.0;      // difference-quotient estimate near the faces
    double spacing = 0.0;
    double allowed = 0.0;        // 1e-9 + lipschitz * spacing
    bool continuous = false;
};

/// Probes every slab face with `samples_per_face` points spread over the
/// remaining axes and compares values a distance `spacing` apart across it.
ContinuityReport check_continuity(const MulticlassMap& map, int samples_per_face, double spacing = 1e-10);

} // namespace mangen
