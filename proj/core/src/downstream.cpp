#include "ffdyn/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ffdyn/errors.hpp"

namespace ffdyn {

std::size_t downstream_feature_dim(const FFNetwork& network, bool include_first_layer) {
    if (network.depth() == 0) throw InvalidArgument("network has no layers");
    bool include_first = include_first_layer || network.depth() == 1;
    std::size_t dim = 0;
    for (std::size_t k = include_first ? 0 : 1; k < network.depth(); ++k) {
        dim += network.layers[k].width();
    }
    return dim;
}

DownstreamClassifier make_downstream(const FFNetwork& network, const SgdConfig& rates,
                                     bool include_first_layer) {
    DownstreamClassifier clf;
    clf.include_first_layer = include_first_layer;
    std::size_t dim = downstream_feature_dim(network, include_first_layer);
    clf.weights = Matrix2D(dim, kNumClasses);  // zeros: an untrained head predicts class 0
    clf.biases.assign(kNumClasses, 0.0);
    clf.opt_weights = OptimizerState(rates, dim * kNumClasses);
    clf.opt_biases = OptimizerState(rates, kNumClasses);
    return clf;
}

Matrix2D collect_features_batch(const FFNetwork& network, std::span<const ImageVector> images,
                                bool include_first_layer) {
    const std::size_t count = images.size();
    if (count == 0) throw InvalidArgument("collect_features_batch: no images");
    bool include_first = include_first_layer || network.depth() == 1;

    Matrix2D input(count, kImagePixels);
    for (std::size_t i = 0; i < count; ++i) {
        ImageVector neutral = embed_neutral(images[i]);
        std::copy(neutral.pixels.begin(), neutral.pixels.end(), input.row(i).begin());
    }

    Matrix2D features(count, downstream_feature_dim(network, include_first_layer));
    std::size_t offset = 0;
    for (std::size_t k = 0; k < network.depth(); ++k) {
        LayerForwardResult fwd = layer_forward(network.layers[k], input);
        if (k > 0 || include_first) {
            Matrix2D normalized = normalize_activity(fwd.activations);
            for (std::size_t i = 0; i < count; ++i) {
                auto src = normalized.row(i);
                std::copy(src.begin(), src.end(), features.row(i).begin() + offset);
            }
            offset += normalized.cols();
        }
        if (k + 1 < network.depth()) input = propagate_activity(fwd.activations, k);
    }
    return features;
}

std::vector<double> collect_features(const FFNetwork& network, const ImageVector& image,
                                     bool include_first_layer) {
    Matrix2D features = collect_features_batch(network, std::span(&image, 1), include_first_layer);
    auto row = features.row(0);
    return {row.begin(), row.end()};
}

DownstreamBatchEval evaluate_downstream_batch(const DownstreamClassifier& classifier,
                                              const Matrix2D& features,
                                              std::span<const std::uint8_t> labels) {
    const std::size_t n = features.rows();
    if (n == 0) throw InvalidArgument("evaluate_downstream_batch: empty batch");
    if (labels.size() != n) {
        throw ShapeError("evaluate_downstream_batch: " + std::to_string(n) + " rows vs " +
                         std::to_string(labels.size()) + " labels");
    }
    if (features.cols() != classifier.feature_dim()) {
        throw ShapeError("evaluate_downstream_batch: feature width " +
                         std::to_string(features.cols()) + " vs classifier " +
                         std::to_string(classifier.feature_dim()));
    }

    Matrix2D logits = matmul(features, classifier.weights);
    Matrix2D dlogits(n, kNumClasses);
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = logits.row(i);
        for (int c = 0; c < kNumClasses; ++c) row[c] += classifier.biases[c];
        double peak = *std::max_element(row.begin(), row.end());
        double sum_exp = 0.0;
        for (double v : row) sum_exp += std::exp(v - peak);
        double lse = peak + std::log(sum_exp);
        loss += lse - row[labels[i]];
        for (int c = 0; c < kNumClasses; ++c) {
            double p = std::exp(row[c] - lse);
            dlogits(i, c) = (p - (c == labels[i] ? 1.0 : 0.0)) * inv_n;
        }
    }

    DownstreamBatchEval eval;
    eval.loss = loss * inv_n;
    eval.d_weights = matmul_transposed_a(features, dlogits);
    eval.d_biases.assign(kNumClasses, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < kNumClasses; ++c) eval.d_biases[c] += dlogits(i, c);
    }
    return eval;
}

double train_downstream_epoch(DownstreamClassifier& classifier, const FFNetwork& network,
                              const DatasetSplit& split, std::size_t batch_size) {
    if (split.size() == 0) throw InvalidArgument("train_downstream_epoch: empty split");
    if (batch_size == 0) throw InvalidArgument("train_downstream_epoch: batch_size must be >= 1");

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < split.size(); start += batch_size) {
        std::size_t end = std::min(start + batch_size, split.size());
        std::span<const ImageVector> images(split.images.data() + start, end - start);
        Matrix2D features =
            collect_features_batch(network, images, classifier.include_first_layer);
        std::span<const std::uint8_t> labels(split.labels.data() + start, end - start);
        DownstreamBatchEval eval = evaluate_downstream_batch(classifier, features, labels);
        if (!std::isfinite(eval.loss)) {
            throw DivergenceError(0, "non-finite loss in the downstream head");
        }
        sgd_step(classifier.weights, eval.d_weights, classifier.opt_weights);
        sgd_step(classifier.biases, eval.d_biases, classifier.opt_biases);
        loss_sum += eval.loss * static_cast<double>(end - start);
    }
    return loss_sum / static_cast<double>(split.size());
}

std::vector<int> downstream_predict_batch(const DownstreamClassifier& classifier,
                                          const Matrix2D& features) {
    Matrix2D logits = matmul(features, classifier.weights);
    std::vector<int> predictions(features.rows(), 0);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto row = logits.row(i);
        int best = 0;
        double best_value = row[0] + classifier.biases[0];
        for (int c = 1; c < kNumClasses; ++c) {
            double v = row[c] + classifier.biases[c];
            if (v > best_value) {  // strict: ties keep the lowest class
                best_value = v;
                best = c;
            }
        }
        predictions[i] = best;
    }
    return predictions;
}

double overall_accuracy(const DownstreamClassifier& classifier, const FFNetwork& network,
                        const DatasetSplit& split) {
    if (split.size() == 0) throw InvalidArgument("overall_accuracy: empty split");
    constexpr std::size_t kChunk = 2048;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < split.size(); start += kChunk) {
        std::size_t end = std::min(start + kChunk, split.size());
        std::span<const ImageVector> images(split.images.data() + start, end - start);
        Matrix2D features =
            collect_features_batch(network, images, classifier.include_first_layer);
        std::vector<int> predicted = downstream_predict_batch(classifier, features);
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            if (predicted[i] == split.labels[start + i]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(split.size());
}

}  // namespace ffdyn
