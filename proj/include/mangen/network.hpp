#pragma once

#include "mangen/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mangen {

enum class Activation { tanh, sigmoid, identity };
enum class LayerKind { fully_connected, conv, conv_transpose };

std::string to_string(Activation a);
std::string to_string(LayerKind k);
Activation activation_from_string(const std::string& name);
LayerKind layer_kind_from_string(const std::string& name);

/// Smooth, monotone and with nowhere-vanishing derivative.
bool is_smooth_monotone(Activation a);

double activate(Activation a, double x);
/// Derivative expressed through the activation output y = activate(x).
double activation_slope(Activation a, double y);

/// One layer y = act(L x + b).
///
/// For convolutions the geometry fields describe the circular convolution
/// m x m x k -> n x n x l with n = ceil(m / stride):
///   out[o, Y, X] = sum_{c,p,q} C[o, c, p, q] in[c, (Y*stride + p) mod m, (X*stride + q) mod m].
/// A conv_transpose layer applies the adjoint of that convolution, so it maps
/// n x n x l -> m x m x k with the same kernel. Feature tensors are flattened
/// channel-major: index = c*size*size + row*size + col.
struct LayerSpec {
    LayerKind kind = LayerKind::fully_connected;
    Activation activation = Activation::identity;

    int in_features = 0;   // fully connected
    int out_features = 0;

    int conv_size = 0;          // m, spatial size of the convolution input
    int conv_in_channels = 0;   // k
    int conv_out_channels = 0;  // l
    int kernel = 0;             // s
    int stride = 1;

    std::vector<double> weights;  // A (out x in, row-major) or C (l x k x s x s)
    std::vector<double> bias;     // one per output feature (FC) or output channel

    static LayerSpec fully_connected(int in, int out, Activation act);
    static LayerSpec conv(int size, int in_channels, int out_channels, int kernel, int stride, Activation act);
    static LayerSpec conv_transpose(int size, int in_channels, int out_channels, int kernel, int stride,
                                    Activation act);

    /// n = ceil(m / stride).
    int conv_out_size() const { return (conv_size + stride - 1) / stride; }
    int input_size() const;
    int output_size() const;
    std::size_t weight_count() const;
    std::size_t bias_count() const;
    int fan_in() const;

    double kernel_at(int o, int c, int p, int q) const {
        return weights[static_cast<std::size_t>(((o * conv_in_channels + c) * kernel + p) * kernel + q)];
    }

    /// Throws ShapeError on inconsistent geometry or parameter lengths.
    void validate() const;
};

struct NetworkSpec {
    std::vector<LayerSpec> layers;
    std::uint64_t seed = 0;

    int input_dim() const { return layers.empty() ? 0 : layers.front().input_size(); }
    int output_dim() const { return layers.empty() ? 0 : layers.back().output_size(); }
    std::size_t parameter_count() const;
    /// Layer shapes must chain; throws ShapeError naming the first break.
    void validate() const;
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
void initialize(NetworkSpec& net, std::uint64_t seed);
/// Fully connected tanh MLP with a linear output layer, initialised.
NetworkSpec make_mlp(int input_dim, const std::vector<int>& hidden, int output_dim, std::uint64_t seed,
                     Activation hidden_activation = Activation::tanh);

/// Linear part of a layer (no bias, no activation) and its adjoint.
Vector apply_linear(const LayerSpec& layer, const Vector& x);
Vector apply_linear_adjoint(const LayerSpec& layer, const Vector& y);

Vector forward(const NetworkSpec& net, const Vector& input);

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;
    Vector input;

    std::vector<double> flatten() const;
};

/// Reverse-mode gradients of <output_gradient, net(input)>.
Gradients backward(const NetworkSpec& net, const Vector& input, const Vector& output_gradient);

/// output_dim x input_dim, one reverse pass per output row.
Matrix jacobian(const NetworkSpec& net, const Vector& input);

std::vector<double> flatten_parameters(const NetworkSpec& net);
void set_parameters(NetworkSpec& net, const std::vector<double>& flat);

} // namespace mangen
