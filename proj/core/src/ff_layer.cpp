#include "ffdyn/ff_layer.hpp"

#include <string>

#include "ffdyn/errors.hpp"

namespace ffdyn {

FFLayer make_layer(std::size_t fan_in, std::size_t width, const SgdConfig& sgd, Rng& rng,
                   double threshold, double initial_peer_mean) {
    if (width == 0) throw InvalidArgument("layer width must be >= 1");
    if (initial_peer_mean < 0.0) {
        throw InvalidArgument("initial peer running mean must be non-negative");
    }
    FFLayer layer;
    layer.weights = init_weights(fan_in, width, rng);
    layer.biases.assign(width, 0.0);
    layer.goodness.threshold = threshold > 0.0 ? threshold : static_cast<double>(width);
    layer.peer_running_mean.assign(width, initial_peer_mean);
    layer.opt_weights = OptimizerState(sgd, fan_in * width);
    layer.opt_biases = OptimizerState(sgd, width);
    return layer;
}

LayerForwardResult layer_forward(const FFLayer& layer, const Matrix2D& input) {
    if (input.cols() != layer.fan_in()) {
        throw ShapeError("layer_forward: input width " + std::to_string(input.cols()) +
                         " vs layer fan_in " + std::to_string(layer.fan_in()));
    }
    LayerForwardResult result;
    result.activations = matmul(input, layer.weights);

    const std::size_t batch = input.rows();
    const std::size_t width = layer.width();
    result.goodness_logit.resize(batch);
    result.y.resize(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        auto row = result.activations.row(i);
        double sumsq = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            double z = row[j] + layer.biases[j];
            double a = z > 0.0 ? z : 0.0;
            row[j] = a;
            sumsq += a * a;
        }
        result.goodness_logit[i] = sumsq - layer.goodness.threshold;
        result.y[i] = sigmoid(result.goodness_logit[i]);
    }
    return result;
}

double layer_loss(const LayerForwardResult& result, std::span<const Polarity> polarities) {
    const std::size_t batch = result.goodness_logit.size();
    if (batch == 0) throw InvalidArgument("layer_loss: empty batch");
    if (polarities.size() != batch) {
        throw ShapeError("layer_loss: " + std::to_string(batch) + " samples vs " +
                         std::to_string(polarities.size()) + " polarities");
    }
    // -log y = softplus(-logit), -log(1-y) = softplus(logit).
    double total = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
        double logit = result.goodness_logit[i];
        total += polarities[i] == Polarity::positive ? softplus(-logit) : softplus(logit);
    }
    return total / static_cast<double>(batch);
}

PeerNormResult peer_norm_loss(const FFLayer& layer, const Matrix2D& activations,
                              const PeerNormConfig& peer) {
    const std::size_t batch = activations.rows();
    const std::size_t width = activations.cols();
    if (batch == 0) throw InvalidArgument("peer_norm_loss: empty batch");
    if (width != layer.width()) {
        throw ShapeError("peer_norm_loss: activations width " + std::to_string(width) +
                         " vs layer width " + std::to_string(layer.width()));
    }

    PeerNormResult result;
    result.updated_means.resize(width);
    double mu = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
        double col_mean = 0.0;
        for (std::size_t i = 0; i < batch; ++i) col_mean += activations(i, j);
        col_mean /= static_cast<double>(batch);
        double r = (1.0 - peer.momentum) * layer.peer_running_mean[j] + peer.momentum * col_mean;
        result.updated_means[j] = r;
        mu += r;
    }
    mu /= static_cast<double>(width);

    double sq = 0.0;
    for (double r : result.updated_means) sq += (r - mu) * (r - mu);
    result.loss = peer.weight * sq / static_cast<double>(width);
    return result;
}

LayerBatchEval evaluate_layer_batch(const FFLayer& layer, const Matrix2D& input,
                                    std::span<const Polarity> polarities,
                                    const PeerNormConfig& peer) {
    LayerBatchEval eval;
    eval.forward = layer_forward(layer, input);
    eval.goodness_loss = layer_loss(eval.forward, polarities);
    PeerNormResult pn = peer_norm_loss(layer, eval.forward.activations, peer);
    eval.peer_loss = pn.loss;
    eval.total_loss = eval.goodness_loss + eval.peer_loss;
    eval.updated_peer_means = std::move(pn.updated_means);
    return eval;
}

LayerGrads layer_grad(const FFLayer& layer, const Matrix2D& input,
                      std::span<const Polarity> polarities, const PeerNormConfig& peer) {
    return layer_grad(layer, input, polarities, peer,
                      evaluate_layer_batch(layer, input, polarities, peer));
}

LayerGrads layer_grad(const FFLayer&, const Matrix2D& input,
                      std::span<const Polarity> polarities, const PeerNormConfig& peer,
                      const LayerBatchEval& eval) {
    const Matrix2D& a = eval.forward.activations;
    const std::size_t batch = a.rows();
    const std::size_t width = a.cols();

    double mu = 0.0;
    for (double r : eval.updated_peer_means) mu += r;
    mu /= static_cast<double>(width);

    // d(goodness)/dz_ij = (2/B) (y_i - t_i) a_ij; the ReLU mask is
    // absorbed because a_ij = 0 wherever the unit is inactive.
    // d(peer)/dz_ij = lambda 2m/(W B) (r'_j - mu) only where z_ij > 0.
    Matrix2D dz(batch, width);
    const double inv_batch = 1.0 / static_cast<double>(batch);
    const double peer_coeff =
        peer.weight * 2.0 * peer.momentum / (static_cast<double>(width) * static_cast<double>(batch));
    for (std::size_t i = 0; i < batch; ++i) {
        double target = polarities[i] == Polarity::positive ? 1.0 : 0.0;
        double err = eval.forward.y[i] - target;
        for (std::size_t j = 0; j < width; ++j) {
            double act = a(i, j);
            double g = 2.0 * inv_batch * err * act;
            if (act > 0.0) g += peer_coeff * (eval.updated_peer_means[j] - mu);
            dz(i, j) = g;
        }
    }

    LayerGrads grads;
    grads.d_weights = matmul_transposed_a(input, dz);
    grads.d_biases.assign(width, 0.0);
    for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t j = 0; j < width; ++j) grads.d_biases[j] += dz(i, j);
    }
    return grads;
}

namespace {

Matrix2D scale_rows_to(const Matrix2D& activations, double target_norm) {
    Matrix2D out(activations.rows(), activations.cols());
    for (std::size_t i = 0; i < activations.rows(); ++i) {
        auto src = activations.row(i);
        auto dst = out.row(i);
        double sumsq = 0.0;
        for (double v : src) sumsq += v * v;
        double scale = target_norm / (std::sqrt(sumsq) + 1e-8);
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j] * scale;
    }
    return out;
}

}  // namespace

Matrix2D normalize_activity(const Matrix2D& activations) {
    return scale_rows_to(activations, 1.0);
}

Matrix2D propagate_activity(const Matrix2D& activations, std::size_t producer_index) {
    const double width = static_cast<double>(activations.cols());
    const double target_sq = producer_index == 0 ? 2.0 * width : 0.5 * width;
    return scale_rows_to(activations, std::sqrt(target_sq));
}

}  // namespace ffdyn
