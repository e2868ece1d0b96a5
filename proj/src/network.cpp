#include "mangen/network.hpp"
#include "mangen/rng.hpp"

#include <cmath>
#include <sstream>

namespace mangen {

std::string to_string(Activation a) {
    switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
    }
    return "?";
}

std::string to_string(LayerKind k) {
    switch (k) {
    case LayerKind::fully_connected: return "fully_connected";
    case LayerKind::conv: return "conv";
    case LayerKind::conv_transpose: return "conv_transpose";
    }
    return "?";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "identity") return Activation::identity;
    throw ArgumentError("unknown activation '" + name + "'");
}

LayerKind layer_kind_from_string(const std::string& name) {
    if (name == "fully_connected") return LayerKind::fully_connected;
    if (name == "conv") return LayerKind::conv;
    if (name == "conv_transpose") return LayerKind::conv_transpose;
    throw ArgumentError("unknown layer kind '" + name + "'");
}

bool is_smooth_monotone(Activation a) {
    // every supported activation qualifies; kept as a predicate for the layer check
    switch (a) {
    case Activation::tanh:
    case Activation::sigmoid:
    case Activation::identity: return true;
    }
    return false;
}

double activate(Activation a, double x) {
    switch (a) {
    case Activation::tanh: return std::tanh(x);
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::identity: return x;
    }
    return x;
}

double activation_slope(Activation a, double y) {
    switch (a) {
    case Activation::tanh: return 1.0 - y * y;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::identity: return 1.0;
    }
    return 1.0;
}

LayerSpec LayerSpec::fully_connected(int in, int out, Activation act) {
    LayerSpec l;
    l.kind = LayerKind::fully_connected;
    l.activation = act;
    l.in_features = in;
    l.out_features = out;
    l.weights.assign(l.weight_count(), 0.0);
    l.bias.assign(l.bias_count(), 0.0);
    l.validate();
    return l;
}

static LayerSpec make_conv(LayerKind kind, int size, int in_channels, int out_channels, int kernel, int stride,
                           Activation act) {
    LayerSpec l;
    l.kind = kind;
    l.activation = act;
    l.conv_size = size;
    l.conv_in_channels = in_channels;
    l.conv_out_channels = out_channels;
    l.kernel = kernel;
    l.stride = stride;
    l.validate();
    l.weights.assign(l.weight_count(), 0.0);
    l.bias.assign(l.bias_count(), 0.0);
    return l;
}

LayerSpec LayerSpec::conv(int size, int in_channels, int out_channels, int kernel, int stride, Activation act) {
    return make_conv(LayerKind::conv, size, in_channels, out_channels, kernel, stride, act);
}

LayerSpec LayerSpec::conv_transpose(int size, int in_channels, int out_channels, int kernel, int stride,
                                    Activation act) {
    return make_conv(LayerKind::conv_transpose, size, in_channels, out_channels, kernel, stride, act);
}

int LayerSpec::input_size() const {
    switch (kind) {
    case LayerKind::fully_connected: return in_features;
    case LayerKind::conv: return conv_size * conv_size * conv_in_channels;
    case LayerKind::conv_transpose: return conv_out_size() * conv_out_size() * conv_out_channels;
    }
    return 0;
}

int LayerSpec::output_size() const {
    switch (kind) {
    case LayerKind::fully_connected: return out_features;
    case LayerKind::conv: return conv_out_size() * conv_out_size() * conv_out_channels;
    case LayerKind::conv_transpose: return conv_size * conv_size * conv_in_channels;
    }
    return 0;
}

std::size_t LayerSpec::weight_count() const {
    if (kind == LayerKind::fully_connected) return static_cast<std::size_t>(in_features) * out_features;
    return static_cast<std::size_t>(conv_out_channels) * conv_in_channels * kernel * kernel;
}

std::size_t LayerSpec::bias_count() const {
    switch (kind) {
    case LayerKind::fully_connected: return static_cast<std::size_t>(out_features);
    case LayerKind::conv: return static_cast<std::size_t>(conv_out_channels);
    case LayerKind::conv_transpose: return static_cast<std::size_t>(conv_in_channels);
    }
    return 0;
}

int LayerSpec::fan_in() const {
    switch (kind) {
    case LayerKind::fully_connected: return in_features;
    case LayerKind::conv: return conv_in_channels * kernel * kernel;
    case LayerKind::conv_transpose: return conv_out_channels * kernel * kernel;
    }
    return 1;
}

void LayerSpec::validate() const {
    std::ostringstream os;
    if (kind == LayerKind::fully_connected) {
        if (in_features < 1 || out_features < 1) os << "fully connected layer needs positive sizes";
    } else {
        if (conv_size < 1 || conv_in_channels < 1 || conv_out_channels < 1 || kernel < 1) {
            os << to_string(kind) << " layer needs positive size, channels and kernel";
        } else if (stride < 1) {
            os << to_string(kind) << " stride must be >= 1";
        } else if (kernel > conv_size) {
            os << to_string(kind) << " kernel " << kernel << " does not fit spatial size " << conv_size;
        }
    }
    if (os.str().empty() && !weights.empty() && weights.size() != weight_count()) {
        os << to_string(kind) << " layer has " << weights.size() << " weights, expected " << weight_count();
    }
    if (os.str().empty() && !bias.empty() && bias.size() != bias_count()) {
        os << to_string(kind) << " layer has " << bias.size() << " biases, expected " << bias_count();
    }
    if (!os.str().empty()) throw ShapeError(os.str());
}

std::size_t NetworkSpec::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight_count() + l.bias_count();
    return n;
}

void NetworkSpec::validate() const {
    if (layers.empty()) throw ShapeError("network has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].validate();
        if (layers[i].weights.size() != layers[i].weight_count() || layers[i].bias.size() != layers[i].bias_count()) {
            throw ShapeError("layer " + std::to_string(i) + " parameters are not allocated");
        }
        if (i > 0 && layers[i].input_size() != layers[i - 1].output_size()) {
            std::ostringstream os;
            os << "layer " << i << " expects " << layers[i].input_size() << " inputs but layer " << i - 1
               << " produces " << layers[i - 1].output_size();
            throw ShapeError(os.str());
        }
    }
}

void initialize(NetworkSpec& net, std::uint64_t seed) {
    net.seed = seed;
    Rng rng(seed);
    for (auto& l : net.layers) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.fan_in()));
        l.weights.resize(l.weight_count());
        for (double& w : l.weights) w = rng.uniform(-bound, bound);
        l.bias.assign(l.bias_count(), 0.0);
    }
    net.validate();
}

NetworkSpec make_mlp(int input_dim, const std::vector<int>& hidden, int output_dim, std::uint64_t seed,
                     Activation hidden_activation) {
    NetworkSpec net;
    int prev = input_dim;
    for (int width : hidden) {
        net.layers.push_back(LayerSpec::fully_connected(prev, width, hidden_activation));
        prev = width;
    }
    net.layers.push_back(LayerSpec::fully_connected(prev, output_dim, Activation::identity));
    initialize(net, seed);
    return net;
}

namespace {

void require_size(const Vector& v, int expected, const char* what) {
    if (v.size() != expected) {
        std::ostringstream os;
        os << what << " has " << v.size() << " entries, expected " << expected;
        throw ShapeError(os.str());
    }
}

Vector conv_forward(const LayerSpec& l, const Vector& x) {
    const int m = l.conv_size, n = l.conv_out_size(), s = l.kernel, st = l.stride;
    Vector y = Vector::Zero(n * n * l.conv_out_channels);
    for (int o = 0; o < l.conv_out_channels; ++o) {
        for (int row = 0; row < n; ++row) {
            for (int col = 0; col < n; ++col) {
                double acc = 0.0;
                for (int c = 0; c < l.conv_in_channels; ++c) {
                    for (int p = 0; p < s; ++p) {
                        const int i = (row * st + p) % m;
                        for (int q = 0; q < s; ++q) {
                            const int j = (col * st + q) % m;
                            acc += l.kernel_at(o, c, p, q) * x[(c * m + i) * m + j];
                        }
                    }
                }
                y[(o * n + row) * n + col] = acc;
            }
        }
    }
    return y;
}

// Adjoint of conv_forward: scatter each output position back onto its taps.
Vector conv_adjoint(const LayerSpec& l, const Vector& y) {
    const int m = l.conv_size, n = l.conv_out_size(), s = l.kernel, st = l.stride;
    Vector x = Vector::Zero(m * m * l.conv_in_channels);
    for (int o = 0; o < l.conv_out_channels; ++o) {
        for (int row = 0; row < n; ++row) {
            for (int col = 0; col < n; ++col) {
                const double g = y[(o * n + row) * n + col];
                for (int c = 0; c < l.conv_in_channels; ++c) {
                    for (int p = 0; p < s; ++p) {
                        const int i = (row * st + p) % m;
                        for (int q = 0; q < s; ++q) {
                            const int j = (col * st + q) % m;
                            x[(c * m + i) * m + j] += l.kernel_at(o, c, p, q) * g;
                        }
                    }
                }
            }
        }
    }
    return x;
}

// dC[o,c,p,q] = sum_{row,col} out_grad[o,row,col] * in[c, tap(row,p), tap(col,q)]
// where "out" and "in" are the convolution's own output and input spaces.
void conv_kernel_gradient(const LayerSpec& l, const Vector& conv_in, const Vector& conv_out_grad,
                          std::vector<double>& grad) {
    const int m = l.conv_size, n = l.conv_out_size(), s = l.kernel, st = l.stride;
    for (int o = 0; o < l.conv_out_channels; ++o) {
        for (int c = 0; c < l.conv_in_channels; ++c) {
            for (int p = 0; p < s; ++p) {
                for (int q = 0; q < s; ++q) {
                    double acc = 0.0;
                    for (int row = 0; row < n; ++row) {
                        const int i = (row * st + p) % m;
                        for (int col = 0; col < n; ++col) {
                            const int j = (col * st + q) % m;
                            acc += conv_out_grad[(o * n + row) * n + col] * conv_in[(c * m + i) * m + j];
                        }
                    }
                    grad[static_cast<std::size_t>(((o * l.conv_in_channels + c) * s + p) * s + q)] += acc;
                }
            }
        }
    }
}

// Bias is per output feature (FC) or per output channel (conv kinds).
int bias_group_size(const LayerSpec& l) {
    switch (l.kind) {
    case LayerKind::fully_connected: return 1;
    case LayerKind::conv: return l.conv_out_size() * l.conv_out_size();
    case LayerKind::conv_transpose: return l.conv_size * l.conv_size;
    }
    return 1;
}

struct Trace {
    std::vector<Vector> inputs;   // input to each layer
    std::vector<Vector> outputs;  // post-activation output of each layer
};

Trace run_forward(const NetworkSpec& net, const Vector& input) {
    require_size(input, net.input_dim(), "network input");
    Trace t;
    t.inputs.reserve(net.layers.size());
    t.outputs.reserve(net.layers.size());
    Vector x = input;
    for (const auto& l : net.layers) {
        t.inputs.push_back(x);
        Vector z = apply_linear(l, x);
        const int group = bias_group_size(l);
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            z[i] = activate(l.activation, z[i] + l.bias[static_cast<std::size_t>(i / group)]);
        }
        t.outputs.push_back(z);
        x = std::move(z);
    }
    return t;
}

} // namespace

Vector apply_linear(const LayerSpec& l, const Vector& x) {
    require_size(x, l.input_size(), "layer input");
    switch (l.kind) {
    case LayerKind::fully_connected: {
        Vector y(l.out_features);
        for (int r = 0; r < l.out_features; ++r) {
            double acc = 0.0;
            for (int c = 0; c < l.in_features; ++c) acc += l.weights[static_cast<std::size_t>(r * l.in_features + c)] * x[c];
            y[r] = acc;
        }
        return y;
    }
    case LayerKind::conv: return conv_forward(l, x);
    case LayerKind::conv_transpose: return conv_adjoint(l, x);
    }
    return x;
}

Vector apply_linear_adjoint(const LayerSpec& l, const Vector& y) {
    require_size(y, l.output_size(), "layer output gradient");
    switch (l.kind) {
    case LayerKind::fully_connected: {
        Vector x = Vector::Zero(l.in_features);
        for (int r = 0; r < l.out_features; ++r) {
            for (int c = 0; c < l.in_features; ++c) x[c] += l.weights[static_cast<std::size_t>(r * l.in_features + c)] * y[r];
        }
        return x;
    }
    case LayerKind::conv: return conv_adjoint(l, y);
    case LayerKind::conv_transpose: return conv_forward(l, y);
    }
    return y;
}

Vector forward(const NetworkSpec& net, const Vector& input) {
    if (net.layers.empty()) throw ShapeError("network has no layers");
    return run_forward(net, input).outputs.back();
}

std::vector<double> Gradients::flatten() const {
    std::vector<double> flat;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        flat.insert(flat.end(), weights[i].begin(), weights[i].end());
        flat.insert(flat.end(), bias[i].begin(), bias[i].end());
    }
    return flat;
}

Gradients backward(const NetworkSpec& net, const Vector& input, const Vector& output_gradient) {
    if (net.layers.empty()) throw ShapeError("network has no layers");
    require_size(output_gradient, net.output_dim(), "output gradient");
    const Trace t = run_forward(net, input);

    Gradients g;
    g.weights.resize(net.layers.size());
    g.bias.resize(net.layers.size());
    Vector upstream = output_gradient;
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const LayerSpec& l = net.layers[li];
        const Vector& out = t.outputs[li];
        Vector delta(out.size());
        for (Eigen::Index i = 0; i < out.size(); ++i) delta[i] = upstream[i] * activation_slope(l.activation, out[i]);

        auto& gb = g.bias[li];
        gb.assign(l.bias_count(), 0.0);
        const int group = bias_group_size(l);
        for (Eigen::Index i = 0; i < delta.size(); ++i) gb[static_cast<std::size_t>(i / group)] += delta[i];

        auto& gw = g.weights[li];
        gw.assign(l.weight_count(), 0.0);
        const Vector& in = t.inputs[li];
        switch (l.kind) {
        case LayerKind::fully_connected:
            for (int r = 0; r < l.out_features; ++r) {
                for (int c = 0; c < l.in_features; ++c) gw[static_cast<std::size_t>(r * l.in_features + c)] = delta[r] * in[c];
            }
            break;
        case LayerKind::conv: conv_kernel_gradient(l, in, delta, gw); break;
        case LayerKind::conv_transpose:
            // the convolution's input space is this layer's output space
            conv_kernel_gradient(l, delta, in, gw);
            break;
        }
        upstream = apply_linear_adjoint(l, delta);
    }
    g.input = std::move(upstream);
    return g;
}

Matrix jacobian(const NetworkSpec& net, const Vector& input) {
    const int out = net.output_dim();
    Matrix jac(out, net.input_dim());
    Vector unit = Vector::Zero(out);
    for (int r = 0; r < out; ++r) {
        unit[r] = 1.0;
        jac.row(r) = backward(net, input, unit).input.transpose();
        unit[r] = 0.0;
    }
    return jac;
}

std::vector<double> flatten_parameters(const NetworkSpec& net) {
    std::vector<double> flat;
    flat.reserve(net.parameter_count());
    for (const auto& l : net.layers) {
        flat.insert(flat.end(), l.weights.begin(), l.weights.end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

void set_parameters(NetworkSpec& net, const std::vector<double>& flat) {
    if (flat.size() != net.parameter_count()) throw ShapeError("parameter vector length does not match the network");
    std::size_t at = 0;
    for (auto& l : net.layers) {
        l.weights.assign(flat.begin() + static_cast<std::ptrdiff_t>(at),
                         flat.begin() + static_cast<std::ptrdiff_t>(at + l.weight_count()));
        at += l.weight_count();
        l.bias.assign(flat.begin() + static_cast<std::ptrdiff_t>(at),
                      flat.begin() + static_cast<std::ptrdiff_t>(at + l.bias_count()));
        at += l.bias_count();
    }
}

} // namespace mangen
