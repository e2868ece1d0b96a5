#include "mangen/embedding.hpp"
#include "mangen/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace mangen;

namespace {

Vector random_vector(int n, Rng& rng) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
}

// Index formula for a single-channel circular conv, kept separate from the library.
Vector naive_single_channel(const std::vector<double>& kernel, int s, int m, int stride, const Vector& x) {
    const int n = (m + stride - 1) / stride;
    Vector y = Vector::Zero(n * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            for (int p = 0; p < s; ++p)
                for (int q = 0; q < s; ++q)
                    y[r * n + c] += kernel[static_cast<std::size_t>(p * s + q)] * x[((r * stride + p) % m) * m + (c * stride + q) % m];
    return y;
}

LayerSpec conv_of(LayerKind kind, int m, int k, int l, int s, int stride) {
    return kind == LayerKind::conv ? LayerSpec::conv(m, k, l, s, stride, Activation::tanh)
                                   : LayerSpec::conv_transpose(m, k, l, s, stride, Activation::tanh);
}

} // namespace

TEST_CASE("conv matrix examples") {
    auto one = LayerSpec::conv(2, 1, 1, 1, 1, Activation::tanh);
    one.weights = {1.0};
    CHECK(build_conv_matrix(one).matrix == Matrix::Identity(4, 4));
    one.weights = {2.5};
    CHECK(build_conv_matrix(one).matrix == 2.5 * Matrix::Identity(4, 4));

    Rng rng(1);
    auto l = LayerSpec::conv(4, 1, 1, 3, 1, Activation::tanh);
    for (double& w : l.weights) w = rng.normal();
    const Matrix a = build_conv_matrix(l).matrix;
    REQUIRE(a.rows() == 16);
    REQUIRE(a.cols() == 16);
    for (int t = 0; t < 50; ++t) {
        const Vector x = random_vector(16, rng);
        CHECK((a * x - naive_single_channel(l.weights, 3, 4, 1, x)).norm() < 1e-12);
    }
}

TEST_CASE("conv matrix reproduces apply_linear for both kinds and strides") {
    Rng rng(2);
    for (auto kind : {LayerKind::conv, LayerKind::conv_transpose})
        for (int m : {2, 3, 5})
            for (int stride : {1, 2, 3})
                for (int s = 1; s <= std::min(m, 3); ++s) {
                    auto l = conv_of(kind, m, 2, 3, s, stride);
                    for (double& w : l.weights) w = rng.normal();
                    const Matrix a = build_conv_matrix(l).matrix;
                    REQUIRE(a.rows() == l.output_size());
                    REQUIRE(a.cols() == l.input_size());
                    const Vector x = random_vector(l.input_size(), rng);
                    CHECK((a * x - apply_linear(l, x)).norm() < 1e-12);
                }
}

TEST_CASE("conv_transpose matrix is the transpose of the conv matrix") {
    Rng rng(3);
    auto c = LayerSpec::conv(4, 2, 3, 3, 2, Activation::tanh);
    for (double& w : c.weights) w = rng.normal();
    auto t = LayerSpec::conv_transpose(4, 2, 3, 3, 2, Activation::tanh);
    t.weights = c.weights;
    CHECK(build_conv_matrix(t).matrix == build_conv_matrix(c).matrix.transpose());
}

TEST_CASE("delta kernel layout") {
    const auto d = delta_kernel(2, 3, 2);
    REQUIRE(d.size() == 24);
    double total = 0.0;
    for (double v : d) total += v;
    CHECK(total == 2.0);
    CHECK(d[0] == 1.0);                    // C[0,0,0,0]
    CHECK(d[(1 * 3 + 1) * 4] == 1.0);      // C[1,1,0,0]
    const auto e = delta_kernel(3, 1, 1);
    CHECK(e == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("rank examples") {
    CHECK(numeric_rank(Matrix::Identity(5, 5)).numeric_rank == 5);
    CHECK(numeric_rank(Matrix::Identity(5, 5)).full_rank);
    Vector u(4), v(3);
    u << 1, 2, 3, 4;
    v << -1, 0.5, 2;
    const auto outer = numeric_rank(u * v.transpose());
    CHECK(outer.numeric_rank == 1);
    CHECK(!outer.full_rank);
    CHECK(numeric_rank(Matrix::Zero(3, 2)).numeric_rank == 0);
    CHECK(default_rank_tolerance(u * v.transpose()) == doctest::Approx(4 * 0x1.0p-52 * 8.0));

    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
        Matrix g(12, 8);
        for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
        const auto r = numeric_rank(g);
        CHECK(r.numeric_rank == 8);
        CHECK(numeric_rank(g, 10.0 * r.tolerance).numeric_rank == 8);
    }
    CHECK(spectral_norm(2.0 * Matrix::Identity(3, 3)) == doctest::Approx(2.0));
}

TEST_CASE("check_layer examples") {
    auto up = LayerSpec::fully_connected(1, 2, Activation::tanh);
    up.weights = {1.0, 2.0};
    const auto e = check_layer(up, 20, 1);
    CHECK(e.verdict == Verdict::embedding);
    CHECK(e.expanding);
    CHECK(e.injective_linear_part);

    CHECK(check_layer(LayerSpec::fully_connected(3, 2, Activation::tanh), 20, 1).verdict == Verdict::not_expanding);
    CHECK(check_layer(LayerSpec::conv(4, 3, 1, 3, 1, Activation::tanh), 20, 1).verdict == Verdict::not_expanding);

    auto dead = LayerSpec::fully_connected(1, 2, Activation::tanh);  // zero weights
    CHECK(check_layer(dead, 20, 1).verdict == Verdict::rank_deficient);
    CHECK_THROWS_AS(check_layer(up, 0, 1), ArgumentError);
    CHECK(to_string(Verdict::embedding) == "embedding");
}

TEST_CASE("stride 1: delta kernel witnesses full rank and random kernels are generic") {
    for (auto kind : {LayerKind::conv, LayerKind::conv_transpose})
        for (int m : {2, 3, 5})
            for (int k : {1, 3})
                for (int l : {1, 3})
                    for (int s : {1, 3}) {
                        if (s > m) continue;
                        auto layer = conv_of(kind, m, k, l, s, 1);
                        if (!is_expanding(layer)) continue;
                        const int kk = kind == LayerKind::conv ? k : l;
                        layer.weights = delta_kernel(layer.conv_out_channels, layer.conv_in_channels, s);
                        CAPTURE(m);
                        CAPTURE(kk);
                        CHECK(numeric_rank(linear_matrix(layer)).numeric_rank == layer.input_size());
                        layer.weights.clear();
                        const auto v = check_layer(layer, 20, 7);
                        CHECK(v.verdict == Verdict::embedding);
                        CHECK(v.deficient_trials == 0);
                        CHECK(v.unstable_trials == 0);
                    }
}

TEST_CASE("stride 2 with a 1x1 kernel reads only a quarter of a 3x3 input") {
    // n = 2 output positions per axis see rows/cols {0, 2}; the middle row and column are never read.
    auto layer = LayerSpec::conv(3, 1, 3, 1, 2, Activation::tanh);
    CHECK(is_expanding(layer));  // 2*2*3 = 12 outputs >= 9 inputs
    layer.weights = delta_kernel(3, 1, 1);
    CHECK(numeric_rank(linear_matrix(layer)).numeric_rank == 4);
    layer.weights.clear();
    const auto v = check_layer(layer, 100, 5);
    CHECK(v.deficient_trials == 100);
    CHECK(v.verdict == Verdict::rank_deficient);
}

TEST_CASE("network injectivity report") {
    NetworkSpec net;
    net.layers = {LayerSpec::fully_connected(2, 8, Activation::tanh), LayerSpec::fully_connected(8, 16, Activation::tanh)};
    initialize(net, 3);
    Rng rng(5);
    std::vector<Vector> points;
    for (int i = 0; i < 50; ++i) points.push_back(random_vector(2, rng));
    const auto rep = check_network_injectivity(net, points, 0);
    CHECK(rep.preconditions_ok);
    CHECK(rep.min_rank == 2);
    CHECK(rep.immersion_at_samples());
    CHECK(rep.stable_under_tolerance);
    CHECK(rep.outputs_distinct);
    CHECK(rep.min_output_separation > 0.0);

    NetworkSpec squeeze;
    squeeze.layers = {LayerSpec::fully_connected(2, 1, Activation::tanh), LayerSpec::fully_connected(1, 4, Activation::tanh)};
    initialize(squeeze, 1);
    const auto bad = check_network_injectivity(squeeze, points, 0);
    CHECK(!bad.preconditions_ok);
    CHECK(bad.violations.size() == 1);
    CHECK(bad.min_rank == 1);
    CHECK(!bad.immersion_at_samples());

    CHECK_THROWS_AS(check_network_injectivity(net, {Vector::Zero(3)}, 0), ShapeError);
}
