#include "mangen/checkpoint.hpp"
#include "mangen/network.hpp"
#include "mangen/rng.hpp"
#include "support/gradcheck.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace mangen;

namespace {

// Written straight from the index formula: out[o,Y,X] += C[o,c,p,q] in[c,(Y st + p) mod m,(X st + q) mod m].
Vector naive_conv(const LayerSpec& l, const Vector& x) {
    const int m = l.conv_size, n = l.conv_out_size();
    Vector y = Vector::Zero(n * n * l.conv_out_channels);
    for (int o = 0; o < l.conv_out_channels; ++o)
        for (int c = 0; c < l.conv_in_channels; ++c)
            for (int yy = 0; yy < n; ++yy)
                for (int xx = 0; xx < n; ++xx)
                    for (int p = 0; p < l.kernel; ++p)
                        for (int q = 0; q < l.kernel; ++q)
                            y[(o * n + yy) * n + xx] += l.kernel_at(o, c, p, q) *
                                                        x[(c * m + (yy * l.stride + p) % m) * m + (xx * l.stride + q) % m];
    return y;
}

// Dense matrix of the conv by probing basis vectors through the naive oracle.
Matrix naive_conv_matrix(const LayerSpec& l) {
    const int in = l.conv_size * l.conv_size * l.conv_in_channels;
    const int n = l.conv_out_size();
    Matrix a(n * n * l.conv_out_channels, in);
    for (int j = 0; j < in; ++j) a.col(j) = naive_conv(l, Vector::Unit(in, j));
    return a;
}

using testing::random_vector;

} // namespace

TEST_CASE("identity layer copies its input") {
    auto l = LayerSpec::fully_connected(3, 3, Activation::identity);
    for (int i = 0; i < 3; ++i) l.weights[static_cast<std::size_t>(i * 3 + i)] = 1.0;
    NetworkSpec net{{l}, 0};
    Vector x(3);
    x << 1.5, -2.0, 7.0;
    CHECK(forward(net, x) == x);
}

TEST_CASE("tanh outputs stay in [-1, 1]") {
    Rng rng(1);
    auto net = make_mlp(4, {16}, 16, 3, Activation::tanh);
    net.layers.back().activation = Activation::tanh;
    for (int t = 0; t < 50; ++t) {
        const Vector y = forward(net, 1e3 * random_vector(4, rng));
        CHECK(y.cwiseAbs().maxCoeff() <= 1.0);
    }
}

TEST_CASE("1x1 delta kernel convolution copies every channel") {
    auto l = LayerSpec::conv(3, 2, 2, 1, 1, Activation::identity);
    l.weights = {1, 0, 0, 1};
    Rng rng(2);
    const Vector x = random_vector(18, rng);
    CHECK(apply_linear(l, x) == x);
}

TEST_CASE("conv matches the naive index formula") {
    Rng rng(3);
    for (int m : {1, 2, 3, 5})
        for (int k : {1, 2})
            for (int lc : {1, 3})
                for (int s = 1; s <= std::min(m, 3); ++s)
                    for (int st : {1, 2, 3}) {
                        auto l = LayerSpec::conv(m, k, lc, s, st, Activation::identity);
                        for (double& w : l.weights) w = rng.normal();
                        const Vector x = random_vector(l.input_size(), rng);
                        CHECK((apply_linear(l, x) - naive_conv(l, x)).norm() < 1e-12);
                        auto t = LayerSpec::conv_transpose(m, k, lc, s, st, Activation::identity);
                        t.weights = l.weights;
                        const Vector y = random_vector(t.input_size(), rng);
                        CHECK((apply_linear(t, y) - naive_conv_matrix(l).transpose() * y).norm() < 1e-12);
                    }
}

TEST_CASE("adjoint identity <Lx, y> = <x, L*y> over the layer grid") {
    Rng rng(4);
    double worst = 0.0;
    for (int m : {2, 3, 4, 5})
        for (int k : {1, 3})
            for (int lc : {1, 3})
                for (int s = 1; s <= std::min(m, 3); ++s)
                    for (int st : {1, 2})
                        for (auto make : {&LayerSpec::conv, &LayerSpec::conv_transpose}) {
                            auto l = make(m, k, lc, s, st, Activation::identity);
                            for (double& w : l.weights) w = rng.normal();
                            const Vector x = random_vector(l.input_size(), rng);
                            const Vector y = random_vector(l.output_size(), rng);
                            worst = std::max(worst, std::abs(apply_linear(l, x).dot(y) - x.dot(apply_linear_adjoint(l, y))));
                        }
    CHECK(worst < 1e-10);
}

TEST_CASE("backward closed form for one tanh layer") {
    auto l = LayerSpec::fully_connected(2, 1, Activation::tanh);
    l.weights = {0.3, -0.7};
    l.bias = {0.2};
    NetworkSpec net{{l}, 0};
    Vector x(2);
    x << 1.0, 2.0;
    const double y = std::tanh(0.3 - 1.4 + 0.2);
    const auto g = backward(net, x, Vector::Ones(1));
    const double slope = 1.0 - y * y;
    CHECK(g.weights[0][0] == doctest::Approx(slope * 1.0));
    CHECK(g.weights[0][1] == doctest::Approx(slope * 2.0));
    CHECK(g.bias[0][0] == doctest::Approx(slope));
    CHECK(g.input[0] == doctest::Approx(slope * 0.3));
    CHECK(g.input[1] == doctest::Approx(slope * -0.7));
}

TEST_CASE("backward agrees with central differences on 20 architectures x 5 inputs") {
    Rng rng(5);
    double worst = 0.0;
    for (int a = 0; a < 20; ++a) {
        const NetworkSpec net = testing::random_architecture(a, rng);
        for (int trial = 0; trial < 5; ++trial) {
            const Vector x = random_vector(net.input_dim(), rng);
            const Vector g = random_vector(net.output_dim(), rng);
            worst = std::max(worst, testing::gradient_relative_error(net, x, g));
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("jacobian rows match finite differences") {
    Rng rng(6);
    for (int a = 0; a < 5; ++a) {
        const NetworkSpec net = testing::random_architecture(a, rng);
        const Vector x = random_vector(net.input_dim(), rng);
        const Matrix j = jacobian(net, x);
        REQUIRE(j.rows() == net.output_dim());
        REQUIRE(j.cols() == net.input_dim());
        Matrix fd(j.rows(), j.cols());
        for (int i = 0; i < net.input_dim(); ++i) {
            Vector xp = x, xm = x;
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            fd.col(i) = (forward(net, xp) - forward(net, xm)) / 2e-6;
        }
        CHECK((fd - j).norm() < 1e-6 * std::max(1.0, j.norm()));
    }
}

TEST_CASE("linear network jacobian is the weight matrix") {
    auto l = LayerSpec::fully_connected(2, 3, Activation::identity);
    l.weights = {1, 2, 3, 4, 5, 6};
    const NetworkSpec net{{l}, 0};
    Matrix expected(3, 2);
    expected << 1, 2, 3, 4, 5, 6;
    CHECK((jacobian(net, Vector::Zero(2)) - expected).norm() == 0.0);
}

TEST_CASE("shape errors") {
    const auto net = make_mlp(2, {4}, 3, 1);
    CHECK_THROWS_AS(forward(net, Vector::Zero(3)), ShapeError);
    NetworkSpec broken{{LayerSpec::fully_connected(2, 4, Activation::tanh), LayerSpec::fully_connected(5, 1, Activation::identity)}, 0};
    CHECK_THROWS_AS(broken.validate(), ShapeError);
    auto l = LayerSpec::fully_connected(2, 2, Activation::identity);
    l.weights.pop_back();
    CHECK_THROWS_AS(l.validate(), ShapeError);
}

TEST_CASE("initialisation is deterministic and bounded by 1/sqrt(fan_in)") {
    const auto a = make_mlp(3, {64, 32}, 2, 17);
    const auto b = make_mlp(3, {64, 32}, 2, 17);
    const auto c = make_mlp(3, {64, 32}, 2, 18);
    CHECK(flatten_parameters(a) == flatten_parameters(b));
    CHECK(flatten_parameters(a) != flatten_parameters(c));
    for (const auto& l : a.layers) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.fan_in()));
        for (double w : l.weights) CHECK(std::abs(w) <= bound);
        for (double v : l.bias) CHECK(v == 0.0);
    }
    CHECK(a.parameter_count() == 3 * 64 + 64 + 64 * 32 + 32 + 32 * 2 + 2);
}

TEST_CASE("checkpoint round trip is bit exact") {
    Rng rng(7);
    for (int a = 0; a < 5; ++a) {
        const NetworkSpec net = testing::random_architecture(a, rng);
        std::stringstream buffer;
        write_checkpoint(net, buffer);
        const NetworkSpec back = read_checkpoint(buffer);
        CHECK(flatten_parameters(back) == flatten_parameters(net));
        CHECK(back.seed == net.seed);
        REQUIRE(back.layers.size() == net.layers.size());
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            CHECK(back.layers[i].kind == net.layers[i].kind);
            CHECK(back.layers[i].activation == net.layers[i].activation);
            CHECK(back.layers[i].stride == net.layers[i].stride);
        }
        const Vector x = random_vector(net.input_dim(), rng);
        CHECK(forward(back, x) == forward(net, x));
    }
}

TEST_CASE("damaged checkpoints are rejected") {
    const auto net = make_mlp(2, {3}, 1, 1);
    std::stringstream buffer;
    write_checkpoint(net, buffer);
    const std::string good = buffer.str();

    std::stringstream truncated(good.substr(0, good.size() - 4));
    CHECK_THROWS_AS(read_checkpoint(truncated), IoError);
    std::stringstream garbage("not a checkpoint\n");
    CHECK_THROWS_AS(read_checkpoint(garbage), IoError);
    std::string wrong_format = good;
    wrong_format.replace(wrong_format.find("mangen-network"), 14, "mangen-netw0rk");
    std::stringstream bad(wrong_format);
    CHECK_THROWS_AS(read_checkpoint(bad), IoError);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/net.ckpt"), IoError);
}

TEST_CASE("activation names round trip") {
    for (auto a : {Activation::tanh, Activation::sigmoid, Activation::identity})
        CHECK(activation_from_string(to_string(a)) == a);
    for (auto k : {LayerKind::fully_connected, LayerKind::conv, LayerKind::conv_transpose})
        CHECK(layer_kind_from_string(to_string(k)) == k);
    CHECK(is_smooth_monotone(Activation::tanh));
    CHECK(is_smooth_monotone(Activation::sigmoid));
}
