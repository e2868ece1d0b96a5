#include "mangen/train.hpp"
#include "mangen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mangen {

std::string to_string(OptimizerKind k) {
    switch (k) {
    case OptimizerKind::gradient_descent: return "gradient_descent";
    case OptimizerKind::momentum: return "momentum";
    case OptimizerKind::adam: return "adam";
    }
    return "?";
}

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "gradient_descent") return OptimizerKind::gradient_descent;
    if (name == "momentum") return OptimizerKind::momentum;
    if (name == "adam") return OptimizerKind::adam;
    throw ArgumentError("unknown optimizer '" + name + "'");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
    if (epochs < 0) throw ArgumentError("epochs must be non-negative");
    if (batch_size < 1) throw ArgumentError("batch_size must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("momentum must lie in [0, 1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ArgumentError("adam betas must lie in [0, 1)");
}

namespace {

constexpr std::size_t kChunk = 8;

void check_data(const NetworkSpec& net, const std::vector<Sample>& data) {
    if (data.empty()) throw ArgumentError("training data is empty");
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].input.size() != net.input_dim() || data[i].target.size() != net.output_dim()) {
            std::ostringstream os;
            os << "sample " << i << " has shape (" << data[i].input.size() << " -> " << data[i].target.size()
               << "), network is (" << net.input_dim() << " -> " << net.output_dim() << ")";
            throw ShapeError(os.str());
        }
    }
}

// Sum of per-sample MSE gradients over `indices`, scaled by `scale`.
std::vector<double> batch_gradient(const NetworkSpec& net, const std::vector<Sample>& data,
                                   const std::vector<std::size_t>& indices, std::size_t begin, std::size_t end,
                                   double scale) {
    const std::size_t count = end - begin;
    const std::size_t chunks = (count + kChunk - 1) / kChunk;
    const std::size_t params = net.parameter_count();
    std::vector<std::vector<double>> partial(chunks);
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < chunks; ++c) {
        auto& acc = partial[c];
        acc.assign(params, 0.0);
        const std::size_t stop = std::min(end, begin + (c + 1) * kChunk);
        for (std::size_t k = begin + c * kChunk; k < stop; ++k) {
            const Sample& s = data[indices[k]];
            const Vector residual = forward(net, s.input) - s.target;
            const auto g = backward(net, s.input, (2.0 * scale) * residual).flatten();
            for (std::size_t p = 0; p < params; ++p) acc[p] += g[p];
        }
    }
    std::vector<double> total(params, 0.0);
    for (const auto& acc : partial) {
        for (std::size_t p = 0; p < params; ++p) total[p] += acc[p];
    }
    return total;
}

} // namespace

double mean_squared_error(const NetworkSpec& net, const std::vector<Sample>& data) {
    check_data(net, data);
    std::vector<double> per(data.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < data.size(); ++i) per[i] = (forward(net, data[i].input) - data[i].target).squaredNorm();
    const double sum = std::accumulate(per.begin(), per.end(), 0.0);
    return sum / (static_cast<double>(data.size()) * net.output_dim());
}

double max_pointwise_error(const NetworkSpec& net, const std::vector<Sample>& data) {
    check_data(net, data);
    double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
    for (std::size_t i = 0; i < data.size(); ++i) {
        worst = std::max(worst, (forward(net, data[i].input) - data[i].target).norm());
    }
    return worst;
}

std::vector<double> loss_gradient(const NetworkSpec& net, const std::vector<Sample>& data) {
    check_data(net, data);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    return batch_gradient(net, data, order, 0, data.size(), 1.0 / (static_cast<double>(data.size()) * net.output_dim()));
}

TrainResult train_regression(NetworkSpec net, const std::vector<Sample>& data, const TrainConfig& config) {
    config.validate();
    net.validate();
    check_data(net, data);

    TrainResult result;
    result.loss_history.push_back(mean_squared_error(net, data));
    if (!std::isfinite(result.loss_history.back())) throw DivergenceError("initial loss is not finite", 0);
    if (result.loss_history.back() <= config.target_loss) {
        result.reached_target = true;
        result.net = std::move(net);
        return result;
    }

    Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> params = flatten_parameters(net);
    std::vector<double> first(params.size(), 0.0), second(params.size(), 0.0);
    long long step = 0;
    const auto batch = static_cast<std::size_t>(config.batch_size);
    const double per_output = 1.0 / net.output_dim();

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        for (std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t end = std::min(order.size(), begin + batch);
            const double scale = per_output / static_cast<double>(end - begin);
            const auto grad = batch_gradient(net, data, order, begin, end, scale);
            ++step;
            switch (config.optimizer) {
            case OptimizerKind::gradient_descent:
                for (std::size_t p = 0; p < params.size(); ++p) params[p] -= config.learning_rate * grad[p];
                break;
            case OptimizerKind::momentum:
                for (std::size_t p = 0; p < params.size(); ++p) {
                    first[p] = config.momentum * first[p] + grad[p];
                    params[p] -= config.learning_rate * first[p];
                }
                break;
            case OptimizerKind::adam: {
                const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
                for (std::size_t p = 0; p < params.size(); ++p) {
                    first[p] = config.beta1 * first[p] + (1.0 - config.beta1) * grad[p];
                    second[p] = config.beta2 * second[p] + (1.0 - config.beta2) * grad[p] * grad[p];
                    params[p] -= config.learning_rate * (first[p] / c1) / (std::sqrt(second[p] / c2) + config.epsilon);
                }
                break;
            }
            }
            set_parameters(net, params);
        }
        const double loss = mean_squared_error(net, data);
        result.loss_history.push_back(loss);
        result.epochs_run = epoch;
        if (!std::isfinite(loss)) {
            throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch), epoch);
        }
        if (loss <= config.target_loss) {
            result.reached_target = true;
            break;
        }
    }
    result.net = std::move(net);
    return result;
}

} // namespace mangen
