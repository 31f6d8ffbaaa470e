#include "ffdyn/optimizer.hpp"

#include <string>

#include "ffdyn/errors.hpp"

namespace ffdyn {

void sgd_step(std::span<double> params, std::span<const double> grads, OptimizerState& state) {
    if (params.size() != grads.size() || params.size() != state.velocity.size()) {
        throw ShapeError("sgd_step: size mismatch, params " + std::to_string(params.size()) +
                         ", grads " + std::to_string(grads.size()) + ", velocity " +
                         std::to_string(state.velocity.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        double v = state.momentum * state.velocity[i] + grads[i] + state.weight_decay * params[i];
        state.velocity[i] = v;
        params[i] -= state.learning_rate * v;
    }
}

void sgd_step(Matrix2D& params, const Matrix2D& grads, OptimizerState& state) {
    if (!params.same_shape(grads)) {
        throw ShapeError("sgd_step: params (" + std::to_string(params.rows()) + " x " +
                         std::to_string(params.cols()) + ") vs grads (" +
                         std::to_string(grads.rows()) + " x " + std::to_string(grads.cols()) +
                         ")");
    }
    sgd_step(params.flat(), grads.flat(), state);
}

}  // namespace ffdyn
