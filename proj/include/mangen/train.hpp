#pragma once

#include "mangen/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mangen {

enum class OptimizerKind { gradient_descent, momentum, adam };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& name);

struct TrainConfig {
    double learning_rate = 1e-2;
    int epochs = 100;
    int batch_size = 32;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::adam;
    double momentum = 0.9;       // momentum optimizer
    double beta1 = 0.9;          // adam
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double target_loss = 0.0;    // stop once the full-data MSE is at or below this

    void validate() const;
};

struct Sample {
    Vector input;
    Vector target;
};

struct TrainResult {
    NetworkSpec net;
    /// Full-data MSE before training, then after every epoch.
    std::vector<double> loss_history;
    int epochs_run = 0;
    bool reached_target = false;
};

/// Mean over samples and output entries of the squared residual.
double mean_squared_error(const NetworkSpec& net, const std::vector<Sample>& data);
/// Largest Euclidean residual norm over the data.
double max_pointwise_error(const NetworkSpec& net, const std::vector<Sample>& data);

/// Mini-batch MSE regression. Shuffles come from the config seed; each batch
/// gradient is summed over fixed 8-sample chunks in chunk order, so results are
/// bit-identical for any thread count.
TrainResult train_regression(NetworkSpec net, const std::vector<Sample>& data, const TrainConfig& config);

/// Gradient of the full-data MSE with respect to the flattened parameters.
std::vector<double> loss_gradient(const NetworkSpec& net, const std::vector<Sample>& data);

} // namespace mangen
