#pragma once

#include "mangen/network.hpp"
#include "mangen/rank.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mangen {

/// Dense matrix of a layer's convolution: matrix * vec(x) == apply_linear(layer, x).
/// Shape (n*n*l) x (m*m*k) for conv, the transpose for conv_transpose.
struct ConvMatrix {
    Matrix matrix;
    LayerSpec layer;
};

/// Built from the stride-one circulant structure by keeping rows at
/// stride-multiple spatial positions.
ConvMatrix build_conv_matrix(const LayerSpec& layer);

/// Kernel of shape l x k x s x s with C[i, i, 0, 0] = 1 for i < min(l, k), else 0.
std::vector<double> delta_kernel(int l, int k, int s);

/// Matrix of the layer's linear part: A for fully connected, the convolution matrix otherwise.
Matrix linear_matrix(const LayerSpec& layer);

/// output size >= input size.
bool is_expanding(const LayerSpec& layer);

enum class Verdict { embedding, not_expanding, rank_deficient, bad_activation };
std::string to_string(Verdict v);

struct EmbeddingVerdict {
    bool expanding = false;
    bool injective_linear_part = false;
    bool activation_ok = false;
    Verdict verdict = Verdict::not_expanding;
    int trials = 0;
    int deficient_trials = 0;       // random redraws whose linear part lost rank
    int unstable_trials = 0;        // redraws whose rank moved under a 10x tolerance change
    RankReport actual_rank;         // for the layer's own weights
};

/// Rank test of the layer's own weights plus `trials` Gaussian(0, 1) redraws,
/// each drawn from derive_seed(seed, trial).
EmbeddingVerdict check_layer(const LayerSpec& layer, int trials, std::uint64_t seed);

struct InjectivityReport {
    bool preconditions_ok = true;
    std::vector<std::string> violations;  // one per non-expanding layer
    int latent_dim = 0;
    int points = 0;
    int min_rank = 0;
    int deficient_points = 0;
    bool stable_under_tolerance = true;   // rank identical at tolerance and 10x tolerance
    bool outputs_distinct = true;
    double min_output_separation = 0.0;
    bool immersion_at_samples() const { return points > 0 && min_rank == latent_dim && deficient_points == 0; }
};

/// Jacobian rank at each point and pairwise distinctness of the outputs.
/// `seed` is unused by the deterministic checks and kept for report provenance.
InjectivityReport check_network_injectivity(const NetworkSpec& net, const std::vector<Vector>& points,
                                            std::uint64_t seed);

} // namespace mangen
