#pragma once

#include <span>
#include <vector>

#include "ffdyn/matrix.hpp"

namespace ffdyn {

// SGD hyperparameters shared by every parameter tensor of a run.
struct SgdConfig {
    double learning_rate = 1e-3;
    double momentum = 0.9;
    double weight_decay = 3e-4;
};

// Momentum state for one parameter tensor. Velocity always matches the
// parameter shape and starts at zero.
struct OptimizerState {
    double learning_rate = 1e-3;
    double momentum = 0.9;
    double weight_decay = 3e-4;
    std::vector<double> velocity;

    OptimizerState() = default;
    OptimizerState(const SgdConfig& cfg, std::size_t param_count)
        : learning_rate(cfg.learning_rate),
          momentum(cfg.momentum),
          weight_decay(cfg.weight_decay),
          velocity(param_count, 0.0) {}
};

// v <- momentum*v + g + weight_decay*p;  p <- p - learning_rate*v.
// Weight decay enters as an additive gradient term (classic coupled SGD).
void sgd_step(std::span<double> params, std::span<const double> grads, OptimizerState& state);

void sgd_step(Matrix2D& params, const Matrix2D& grads, OptimizerState& state);

}  // namespace ffdyn
