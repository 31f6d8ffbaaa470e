#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ffdyn/matrix.hpp"
#include "ffdyn/optimizer.hpp"
#include "ffdyn/rng.hpp"
#include "ffdyn/sampling.hpp"

namespace ffdyn {

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow for large |x|.
inline double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

struct GoodnessConfig {
    double threshold = 1.0;  // theta > 0; layer constructors default it to the width
};

struct PeerNormConfig {
    double weight = 0.03;    // lambda; 0 disables the penalty but not the running means
    double momentum = 0.09;  // pull of the batch mean on the running means, in [0,1]
};

// One fully connected ReLU layer trained by its local goodness objective.
struct FFLayer {
    Matrix2D weights;  // fan_in x width
    std::vector<double> biases;
    GoodnessConfig goodness;
    std::vector<double> peer_running_mean;  // per unit, entries stay >= 0
    OptimizerState opt_weights;
    OptimizerState opt_biases;

    std::size_t fan_in() const { return weights.rows(); }
    std::size_t width() const { return weights.cols(); }
};

// Weights ~ normal(0, 1/sqrt(fan_in)), biases zero, running means at
// initial_peer_mean. threshold <= 0 selects the default theta = width.
FFLayer make_layer(std::size_t fan_in, std::size_t width, const SgdConfig& sgd, Rng& rng,
                   double threshold = 0.0, double initial_peer_mean = 0.5);

struct LayerForwardResult {
    Matrix2D activations;               // batch x width, ReLU outputs
    std::vector<double> goodness_logit;  // per sample: sum_j a_j^2 - theta
    std::vector<double> y;               // sigmoid(goodness_logit)
};

LayerForwardResult layer_forward(const FFLayer& layer, const Matrix2D& input);

// Mean binary cross-entropy of y against the polarity indicator,
// evaluated through stable softplus forms (never log(sigmoid(x))).
double layer_loss(const LayerForwardResult& result, std::span<const Polarity> polarities);

struct PeerNormResult {
    double loss = 0.0;
    std::vector<double> updated_means;  // r' = (1-m) r + m * batch mean
};

// Pure: reads the layer's running means, returns the post-batch means
// instead of storing them. loss = lambda * mean_j (r'_j - mu)^2.
PeerNormResult peer_norm_loss(const FFLayer& layer, const Matrix2D& activations,
                              const PeerNormConfig& peer);

// Everything one training step needs from a single forward evaluation.
struct LayerBatchEval {
    LayerForwardResult forward;
    double goodness_loss = 0.0;
    double peer_loss = 0.0;
    double total_loss = 0.0;
    std::vector<double> updated_peer_means;
};

LayerBatchEval evaluate_layer_batch(const FFLayer& layer, const Matrix2D& input,
                                    std::span<const Polarity> polarities,
                                    const PeerNormConfig& peer);

struct LayerGrads {
    Matrix2D d_weights;  // fan_in x width
    std::vector<double> d_biases;
};

// Analytic gradient of (layer_loss + peer_norm_loss) with respect to this
// layer's own parameters. Nothing flows to the input: each layer trains
// in isolation. ReLU subgradient at exactly zero is taken as zero.
LayerGrads layer_grad(const FFLayer& layer, const Matrix2D& input,
                      std::span<const Polarity> polarities, const PeerNormConfig& peer);

// Same gradient from an evaluation already in hand (saves the second
// forward pass inside the training loop).
LayerGrads layer_grad(const FFLayer& layer, const Matrix2D& input,
                      std::span<const Polarity> polarities, const PeerNormConfig& peer,
                      const LayerBatchEval& eval);

// Each row divided by (its Euclidean norm + 1e-8), so the next layer
// cannot read this layer's goodness from vector length.
Matrix2D normalize_activity(const Matrix2D& activations);

// What the next layer actually consumes: normalize_activity scaled to
// a constant row length, so this layer's goodness stays hidden from
// deeper layers. producer_index is the 0-based position of the layer
// that produced the activations. The first hidden layer feeds at
// sqrt(2 * width): a freshly initialized consumer then starts at its
// decision boundary (expected goodness = theta = width), so depth 2
// engages from the first batches. Hidden-to-hidden feeds use
// sqrt(width / 2): a conservative drive under which each deeper layer
// wakes only after its input layer has organized, so depth k reaches a
// given accuracy a few epochs after depth k-1 does.
Matrix2D propagate_activity(const Matrix2D& activations, std::size_t producer_index);

}  // namespace ffdyn
