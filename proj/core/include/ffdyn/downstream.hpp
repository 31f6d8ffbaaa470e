#pragma once

#include <span>
#include <vector>

#include "ffdyn/network.hpp"

namespace ffdyn {

// Linear softmax head over concatenated normalized hidden activities.
// It reads the FF stack but never writes to it; there is no gradient
// path from here into any layer.
struct DownstreamClassifier {
    Matrix2D weights;  // feature_dim x 10, zero-initialized
    std::vector<double> biases;
    OptimizerState opt_weights;
    OptimizerState opt_biases;
    bool include_first_layer = false;

    std::size_t feature_dim() const { return weights.rows(); }
};

// Downstream rates from the experimental configuration: lr 1e-2, weight
// decay 3e-3; momentum shared with the layer optimizer.
inline SgdConfig downstream_sgd_defaults() { return {1e-2, 0.9, 3e-3}; }

std::size_t downstream_feature_dim(const FFNetwork& network, bool include_first_layer);

DownstreamClassifier make_downstream(const FFNetwork& network, const SgdConfig& rates,
                                     bool include_first_layer = false);

// Neutral label embedding, frozen forward pass, then the concatenated
// normalize_activity outputs of the included layers. Layer 1 sees the
// label pixels directly and is excluded unless include_first_layer is
// set; a depth-1 network falls back to its only layer.
std::vector<double> collect_features(const FFNetwork& network, const ImageVector& image,
                                     bool include_first_layer = false);

Matrix2D collect_features_batch(const FFNetwork& network, std::span<const ImageVector> images,
                                bool include_first_layer = false);

// One unshuffled pass over the split in chunks of batch_size; softmax
// cross-entropy minimized by sgd_step. Returns the sample-weighted mean
// cross-entropy. The FF network is read-only here.
double train_downstream_epoch(DownstreamClassifier& classifier, const FFNetwork& network,
                              const DatasetSplit& split, std::size_t batch_size);

// Mean softmax cross-entropy and analytic gradients for one feature
// batch. Exposed so the gradient can be checked against finite
// differences.
struct DownstreamBatchEval {
    double loss = 0.0;
    Matrix2D d_weights;
    std::vector<double> d_biases;
};

DownstreamBatchEval evaluate_downstream_batch(const DownstreamClassifier& classifier,
                                              const Matrix2D& features,
                                              std::span<const std::uint8_t> labels);

std::vector<int> downstream_predict_batch(const DownstreamClassifier& classifier,
                                          const Matrix2D& features);

// Fraction of the split whose argmax class matches the true label; ties
// break toward the lowest class id.
double overall_accuracy(const DownstreamClassifier& classifier, const FFNetwork& network,
                        const DatasetSplit& split);

}  // namespace ffdyn
