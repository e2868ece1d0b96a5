#include "mangen/embedding.hpp"
#include "mangen/hausdorff.hpp"
#include "mangen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mangen {

namespace {

void require_conv(const LayerSpec& layer) {
    if (layer.kind == LayerKind::fully_connected) throw ShapeError("convolution matrix requested for a fully connected layer");
    layer.validate();
    if (layer.weights.size() != layer.weight_count()) throw ShapeError("convolution layer has no kernel weights");
}

Matrix strided_conv_matrix(const LayerSpec& layer) {
    const int m = layer.conv_size, k = layer.conv_in_channels, l = layer.conv_out_channels;
    const int s = layer.kernel, st = layer.stride, n = layer.conv_out_size();
    // Stride-one circulant matrix, m*m*l x m*m*k.
    Matrix full = Matrix::Zero(static_cast<Eigen::Index>(m) * m * l, static_cast<Eigen::Index>(m) * m * k);
    for (int o = 0; o < l; ++o)
        for (int y = 0; y < m; ++y)
            for (int x = 0; x < m; ++x) {
                const Eigen::Index row = (static_cast<Eigen::Index>(o) * m + y) * m + x;
                for (int c = 0; c < k; ++c)
                    for (int p = 0; p < s; ++p)
                        for (int q = 0; q < s; ++q) {
                            const Eigen::Index col = (static_cast<Eigen::Index>(c) * m + (y + p) % m) * m + (x + q) % m;
                            full(row, col) += layer.kernel_at(o, c, p, q);
                        }
            }
    if (st == 1) return full;
    Matrix picked(static_cast<Eigen::Index>(n) * n * l, full.cols());
    for (int o = 0; o < l; ++o)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                picked.row((static_cast<Eigen::Index>(o) * n + y) * n + x) =
                    full.row((static_cast<Eigen::Index>(o) * m + y * st) * m + x * st);
            }
    return picked;
}

LayerSpec with_gaussian_weights(LayerSpec layer, std::uint64_t seed) {
    Rng rng(seed);
    layer.weights.resize(layer.weight_count());
    for (double& w : layer.weights) w = rng.normal();
    return layer;
}

} // namespace

ConvMatrix build_conv_matrix(const LayerSpec& layer) {
    require_conv(layer);
    Matrix c = strided_conv_matrix(layer);
    if (layer.kind == LayerKind::conv_transpose) c.transposeInPlace();
    return {std::move(c), layer};
}

std::vector<double> delta_kernel(int l, int k, int s) {
    if (l < 1 || k < 1 || s < 1) throw ArgumentError("delta kernel needs l, k, s >= 1");
    std::vector<double> c(static_cast<std::size_t>(l) * k * s * s, 0.0);
    for (int i = 0; i < std::min(l, k); ++i) c[static_cast<std::size_t>(i * k + i) * s * s] = 1.0;
    return c;
}

Matrix linear_matrix(const LayerSpec& layer) {
    if (layer.kind != LayerKind::fully_connected) return build_conv_matrix(layer).matrix;
    layer.validate();
    if (layer.weights.size() != layer.weight_count()) throw ShapeError("fully connected layer has no weights");
    Matrix a(layer.out_features, layer.in_features);
    for (int r = 0; r < layer.out_features; ++r)
        for (int c = 0; c < layer.in_features; ++c) a(r, c) = layer.weights[static_cast<std::size_t>(r) * layer.in_features + c];
    return a;
}

bool is_expanding(const LayerSpec& layer) { return layer.output_size() >= layer.input_size(); }

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::embedding: return "embedding";
    case Verdict::not_expanding: return "not_expanding";
    case Verdict::rank_deficient: return "rank_deficient";
    case Verdict::bad_activation: return "bad_activation";
    }
    return "?";
}

EmbeddingVerdict check_layer(const LayerSpec& layer, int trials, std::uint64_t seed) {
    if (trials < 1) throw ArgumentError("check_layer needs at least one trial");
    layer.validate();
    EmbeddingVerdict v;
    v.trials = trials;
    v.expanding = is_expanding(layer);
    v.activation_ok = is_smooth_monotone(layer.activation);

    const LayerSpec own = layer.weights.size() == layer.weight_count() ? layer : with_gaussian_weights(layer, seed);
    v.actual_rank = numeric_rank(linear_matrix(own));
    // Injectivity of x -> Lx needs full column rank.
    const int need = layer.input_size();
    bool injective = v.actual_rank.numeric_rank == need;

    int deficient = 0, unstable = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : deficient, unstable)
    for (int t = 0; t < trials; ++t) {
        const Matrix m = linear_matrix(with_gaussian_weights(layer, derive_seed(seed, static_cast<std::uint64_t>(t))));
        const RankReport r = numeric_rank(m);
        if (r.numeric_rank != need) ++deficient;
        if (numeric_rank(m, 10.0 * r.tolerance).numeric_rank != r.numeric_rank) ++unstable;
    }
    v.deficient_trials = deficient;
    v.unstable_trials = unstable;
    v.injective_linear_part = injective && deficient == 0;

    if (!v.expanding) v.verdict = Verdict::not_expanding;
    else if (!v.activation_ok) v.verdict = Verdict::bad_activation;
    else if (!v.injective_linear_part) v.verdict = Verdict::rank_deficient;
    else v.verdict = Verdict::embedding;
    return v;
}

InjectivityReport check_network_injectivity(const NetworkSpec& net, const std::vector<Vector>& points,
                                            std::uint64_t /*seed*/) {
    net.validate();
    InjectivityReport rep;
    rep.latent_dim = net.input_dim();
    rep.points = static_cast<int>(points.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (!is_expanding(net.layers[i])) {
            std::ostringstream os;
            os << "layer " << i << " (" << to_string(net.layers[i].kind) << ") maps " << net.layers[i].input_size()
               << " -> " << net.layers[i].output_size() << " and is not expanding";
            rep.violations.push_back(os.str());
        }
    }
    rep.preconditions_ok = rep.violations.empty();
    if (points.empty()) return rep;

    std::vector<int> ranks(points.size());
    std::vector<char> stable(points.size());
    PointCloud outputs(net.output_dim(), "outputs");
    for (const auto& p : points) {
        if (p.size() != rep.latent_dim) throw ShapeError("sample point dimension does not match the network input");
    }
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Matrix j = jacobian(net, points[i]);
        const RankReport r = numeric_rank(j);
        ranks[i] = r.numeric_rank;
        stable[i] = numeric_rank(j, 10.0 * r.tolerance).numeric_rank == r.numeric_rank;
    }
    rep.min_rank = *std::min_element(ranks.begin(), ranks.end());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (ranks[i] < rep.latent_dim) ++rep.deficient_points;
        if (!stable[i]) rep.stable_under_tolerance = false;
        const Vector y = forward(net, points[i]);
        outputs.push_back(y);
    }

    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = outputs.size();
#pragma omp parallel for schedule(dynamic) reduction(min : best)
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) best = std::min(best, squared_distance(outputs.point(i), outputs.point(j)));
    rep.min_output_separation = n > 1 ? std::sqrt(best) : 0.0;
    // Distinct latents must map to distinct outputs.
    for (std::size_t i = 0; i < n && rep.outputs_distinct; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (squared_distance(outputs.point(i), outputs.point(j)) == 0.0 && points[i] != points[j]) {
                rep.outputs_distinct = false;
                break;
            }
        }
    return rep;
}

} // namespace mangen
