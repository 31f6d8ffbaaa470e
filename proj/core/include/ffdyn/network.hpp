#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ffdyn/ff_layer.hpp"
#include "ffdyn/sampling.hpp"

namespace ffdyn {

// Stack of locally trained layers. No gradient ever crosses a layer
// boundary; the network type only sequences forwards and owns the peer
// normalization coefficients shared by all layers.
struct FFNetwork {
    std::vector<FFLayer> layers;
    double peer_norm_weight = 0.03;
    double peer_norm_momentum = 0.09;

    std::size_t depth() const { return layers.size(); }
    PeerNormConfig peer() const { return {peer_norm_weight, peer_norm_momentum}; }
};

// threshold <= 0 selects theta = width per layer.
FFNetwork make_network(std::size_t input_dim, std::span<const std::size_t> widths,
                       const SgdConfig& sgd, double peer_norm_weight, double peer_norm_momentum,
                       Rng& rng, double threshold = 0.0, double initial_peer_mean = 0.5);

// Positive rows first, then the matching negatives, as one matrix.
struct TrainingBatch {
    Matrix2D inputs;
    std::vector<Polarity> polarities;
};

TrainingBatch to_training_matrix(const PairedBatch& batch);

// One pass over the stream. Per batch, layer by layer: evaluate, step
// the layer's parameters, store its post-batch peer means, then hand
// propagate_activity(pre-update activations) to the next layer. Returns
// each layer's sample-weighted mean (goodness + peer) loss. Throws
// DivergenceError on a non-finite loss, naming the 1-based layer.
std::vector<double> train_epoch(FFNetwork& network, BatchStream& batches);

struct LayerAccuracyStats {
    std::size_t true_positives = 0;
    std::size_t true_negatives = 0;
    std::size_t samples = 0;
    double accuracy = 0.0;
};

// TP counts positives with y > 0.5, TN negatives with y < 0.5; a sample
// at exactly 0.5 counts toward neither. accuracy = (TP + TN) / samples.
LayerAccuracyStats count_goodness_decisions(std::span<const double> y,
                                            std::span<const Polarity> polarities);

// Frozen evaluation (no parameter or peer-mean updates) over the stream;
// one stats entry per layer.
std::vector<LayerAccuracyStats> layer_accuracy(const FFNetwork& network, BatchStream& batches);

// Label-scan inference: embed each candidate label, sum goodness logits
// over layers, take the argmax (ties break toward the lowest class).
// Layer 1 reads the label pixels directly, so it is excluded from the
// sum unless include_first_layer is set; a depth-1 network falls back to
// its only layer.
int goodness_predict(const FFNetwork& network, const ImageVector& image,
                     bool include_first_layer = false);

std::vector<int> goodness_predict_batch(const FFNetwork& network,
                                        std::span<const ImageVector> images,
                                        bool include_first_layer = false);

double goodness_scan_accuracy(const FFNetwork& network, const DatasetSplit& split,
                              bool include_first_layer = false);

// Inference checkpoint: shapes, thresholds, weights, biases and peer
// means under a versioned binary tag. Optimizer velocity is not saved;
// a loaded network carries fresh optimizer state built from `sgd`.
void save_network(const FFNetwork& network, const std::filesystem::path& path);
FFNetwork load_network(const std::filesystem::path& path, const SgdConfig& sgd = {});

}  // namespace ffdyn
