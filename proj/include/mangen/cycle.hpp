#pragma once

#include "mangen/manifold.hpp"
#include "mangen/network.hpp"
#include "mangen/point_cloud.hpp"
#include "mangen/train.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace mangen {

/// Closed chart box on which the chart is a diffeomorphism onto its image,
/// together with the measure it leaves out.
struct ChartSubset {
    EmbeddedManifold manifold;
    Box kept;                    // closed box in chart coordinates
    double slit_width = 0.0;     // chart width removed around each periodic cut
    double radius_param = 1.0;   // r in (0, 1]; kept = centre +- r * (slit-reduced half extent)
    double measure_deficit = 0.0;
    int quadrature_resolution = 0;

    /// Affine map of the kept box onto [0, 1]^d and its inverse.
    Vector normalize(const ChartPoint& p) const;
    ChartPoint denormalize(const Vector& u) const;
    /// Chart coordinates of an ambient point near the manifold, with periodic
    /// axes unwrapped to the period centred on the kept box.
    ChartPoint chart_of(const AmbientPoint& x) const;
};

struct ChartSubsetOptions {
    double slit_fraction = 1e-3;  // slit width as a fraction of each periodic axis
    double target_fraction = 0.95;  // bisection aims for deficit <= target_fraction * delta
    int resolution = 0;           // quadrature cells per axis; 0 picks 4096 (d = 1) or 256
};

/// Cuts the periodic axes, then shrinks by bisection on r until the measure
/// deficit is at most target_fraction * delta.
/// ArgumentError unless 0 < delta < volume; PrecisionError if the cut alone
/// already removes delta or the quadrature cannot resolve the deficit.
ChartSubset build_chart_subset(const EmbeddedManifold& m, double delta, const ChartSubsetOptions& options = {});

/// Subset with an explicitly chosen kept box (deficit still computed).
ChartSubset chart_subset_from_box(const EmbeddedManifold& m, const Box& kept, int resolution = 0);

/// Source and target subsets sharing one kept chart box, so the ground-truth
/// diffeo is the identity in chart coordinates. Needs identical chart domains.
/// Each manifold's own bisected box is tried; the first one leaving both
/// deficits below delta wins. ArgumentError if the charts differ,
/// PrecisionError if neither box works.
std::pair<ChartSubset, ChartSubset> build_aligned_subsets(const EmbeddedManifold& src, const EmbeddedManifold& dst,
                                                          double delta, const ChartSubsetOptions& options = {});

using PointMap = std::function<Vector(const Vector&)>;

struct Diffeo {
    PointMap forward;   // src ambient -> dst ambient
    PointMap inverse;   // dst ambient -> src ambient
};

/// embed_dst o denormalize_dst o normalize_src o chart_src, and its mirror.
Diffeo ground_truth_diffeo(const ChartSubset& src, const ChartSubset& dst);

/// Volume-uniform, evenly covering ambient sample of the kept region.
PointCloud sample_subset(const ChartSubset& s, std::size_t count, std::uint64_t seed, std::string label = {});

struct CycleTrainOptions {
    std::vector<int> hidden{64};
    std::size_t train_samples = 2048;
    std::size_t held_out = 512;
    /// Ambient Gaussian jitter of training inputs; targets come from the chart
    /// extension, so the fit also pins the normal derivative.
    double tube_width = 0.0;
};

struct CyclePair {
    NetworkSpec forward_net;
    NetworkSpec backward_net;
    ChartSubset source;
    ChartSubset target;
    double fit_eps_forward = 0.0;
    double fit_eps_backward = 0.0;
    double fit_eps = 0.0;
    std::vector<double> forward_loss;
    std::vector<double> backward_loss;
};

/// Supervised fits of the ground-truth diffeo and its inverse.
CyclePair train_cycle(const ChartSubset& src, const ChartSubset& dst, const CycleTrainOptions& options,
                      const TrainConfig& config);

struct CycleReport {
    double hausdorff_forward = 0.0;   // d_H(f(src sample), dst sample)
    double hausdorff_backward = 0.0;
    double composition_error_fwd = 0.0;
    double composition_error_bwd = 0.0;
    double fit_eps = 0.0;             // max of training-time and evaluation-time fit errors
    double lipschitz_f = 0.0;         // sampled max operator norm of Df
    double lipschitz_g = 0.0;
    double bound_fwd = 0.0;           // (1 + lipschitz_g) * fit_eps
    double bound_bwd = 0.0;           // (1 + lipschitz_f) * fit_eps
    bool bound_ok = false;
    double target_fineness = 0.0;     // net fineness of the dst sample
    double source_fineness = 0.0;
    std::size_t sample_count = 0;
    bool lipschitz_sampled = true;    // Lipschitz values are sample maxima, not global bounds
};

struct CycleMaps {
    PointMap f;
    PointMap g;
    std::function<Matrix(const Vector&)> df;  // Jacobians; empty means central differences
    std::function<Matrix(const Vector&)> dg;
};

/// Report for arbitrary maps between the two subsets; `fit_eps_floor` is the
/// training-time fit error folded into fit_eps.
CycleReport evaluate_cycle_maps(const CycleMaps& maps, const ChartSubset& src, const ChartSubset& dst,
                                std::size_t sample_count, std::uint64_t seed, double fit_eps_floor = 0.0);

CycleReport evaluate_cycle(const CyclePair& pair, std::size_t sample_count, std::uint64_t seed);

/// Central-difference Jacobian with step 1e-6 * max(1, |x_i|).
Matrix finite_difference_jacobian(const PointMap& f, const Vector& x);

} // namespace mangen
