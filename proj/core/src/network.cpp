#include "ffdyn/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "ffdyn/errors.hpp"

namespace ffdyn {

FFNetwork make_network(std::size_t input_dim, std::span<const std::size_t> widths,
                       const SgdConfig& sgd, double peer_norm_weight, double peer_norm_momentum,
                       Rng& rng, double threshold, double initial_peer_mean) {
    if (input_dim == 0) throw InvalidArgument("network input dimension must be >= 1");
    if (widths.empty()) throw InvalidArgument("network needs at least one layer");
    if (peer_norm_weight < 0.0) throw InvalidArgument("peer normalization weight must be >= 0");
    if (peer_norm_momentum < 0.0 || peer_norm_momentum > 1.0) {
        throw InvalidArgument("peer normalization momentum must lie in [0, 1]");
    }
    FFNetwork net;
    net.peer_norm_weight = peer_norm_weight;
    net.peer_norm_momentum = peer_norm_momentum;
    net.layers.reserve(widths.size());
    std::size_t fan_in = input_dim;
    for (std::size_t width : widths) {
        net.layers.push_back(make_layer(fan_in, width, sgd, rng, threshold, initial_peer_mean));
        fan_in = width;
    }
    return net;
}

TrainingBatch to_training_matrix(const PairedBatch& batch) {
    const std::size_t pairs = batch.positives.size();
    if (pairs == 0 || batch.negatives.size() != pairs) {
        throw InvalidArgument("training batch needs matching non-empty positive/negative halves");
    }
    TrainingBatch out;
    out.inputs = Matrix2D(2 * pairs, kImagePixels);
    out.polarities.resize(2 * pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
        std::copy(batch.positives[i].pixels.pixels.begin(), batch.positives[i].pixels.pixels.end(),
                  out.inputs.row(i).begin());
        out.polarities[i] = Polarity::positive;
        std::copy(batch.negatives[i].pixels.pixels.begin(), batch.negatives[i].pixels.pixels.end(),
                  out.inputs.row(pairs + i).begin());
        out.polarities[pairs + i] = Polarity::negative;
    }
    return out;
}

std::vector<double> train_epoch(FFNetwork& network, BatchStream& batches) {
    const std::size_t depth = network.depth();
    if (depth == 0) throw InvalidArgument("train_epoch: network has no layers");
    const PeerNormConfig peer = network.peer();

    std::vector<double> loss_sum(depth, 0.0);
    double sample_sum = 0.0;
    while (auto paired = batches.next()) {
        TrainingBatch tb = to_training_matrix(*paired);
        const double n = static_cast<double>(tb.inputs.rows());
        Matrix2D input = std::move(tb.inputs);
        for (std::size_t k = 0; k < depth; ++k) {
            FFLayer& layer = network.layers[k];
            LayerBatchEval eval = evaluate_layer_batch(layer, input, tb.polarities, peer);
            if (!std::isfinite(eval.total_loss)) {
                throw DivergenceError(k + 1, "non-finite training loss in layer " +
                                                 std::to_string(k + 1));
            }
            LayerGrads grads = layer_grad(layer, input, tb.polarities, peer, eval);
            sgd_step(layer.weights, grads.d_weights, layer.opt_weights);
            sgd_step(layer.biases, grads.d_biases, layer.opt_biases);
            layer.peer_running_mean = std::move(eval.updated_peer_means);
            loss_sum[k] += eval.total_loss * n;
            // The next layer sees the activations this layer produced
            // before its update, scaled to constant row length.
            if (k + 1 < depth) input = propagate_activity(eval.forward.activations, k);
        }
        sample_sum += n;
    }
    for (double& s : loss_sum) s /= sample_sum;
    return loss_sum;
}

LayerAccuracyStats count_goodness_decisions(std::span<const double> y,
                                            std::span<const Polarity> polarities) {
    if (y.size() != polarities.size()) {
        throw ShapeError("count_goodness_decisions: " + std::to_string(y.size()) + " scores vs " +
                         std::to_string(polarities.size()) + " polarities");
    }
    LayerAccuracyStats stats;
    stats.samples = y.size();
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (polarities[i] == Polarity::positive) {
            if (y[i] > 0.5) ++stats.true_positives;
        } else {
            if (y[i] < 0.5) ++stats.true_negatives;
        }
    }
    stats.accuracy = stats.samples == 0
                         ? 0.0
                         : static_cast<double>(stats.true_positives + stats.true_negatives) /
                               static_cast<double>(stats.samples);
    return stats;
}

std::vector<LayerAccuracyStats> layer_accuracy(const FFNetwork& network, BatchStream& batches) {
    const std::size_t depth = network.depth();
    std::vector<LayerAccuracyStats> stats(depth);
    while (auto paired = batches.next()) {
        TrainingBatch tb = to_training_matrix(*paired);
        Matrix2D input = std::move(tb.inputs);
        for (std::size_t k = 0; k < depth; ++k) {
            LayerForwardResult fwd = layer_forward(network.layers[k], input);
            LayerAccuracyStats batch_stats = count_goodness_decisions(fwd.y, tb.polarities);
            stats[k].true_positives += batch_stats.true_positives;
            stats[k].true_negatives += batch_stats.true_negatives;
            stats[k].samples += batch_stats.samples;
            if (k + 1 < depth) input = propagate_activity(fwd.activations, k);
        }
    }
    for (LayerAccuracyStats& s : stats) {
        if (s.samples == 0) throw InvalidArgument("layer_accuracy: empty evaluation set");
        s.accuracy = static_cast<double>(s.true_positives + s.true_negatives) /
                     static_cast<double>(s.samples);
    }
    return stats;
}

namespace {

// Adds each layer's goodness logit for `input` rows into `scores`.
void accumulate_goodness(const FFNetwork& network, Matrix2D input, bool include_first_layer,
                         std::span<double> scores) {
    bool include_first = include_first_layer || network.depth() == 1;
    for (std::size_t k = 0; k < network.depth(); ++k) {
        LayerForwardResult fwd = layer_forward(network.layers[k], input);
        if (k > 0 || include_first) {
            for (std::size_t i = 0; i < scores.size(); ++i) scores[i] += fwd.goodness_logit[i];
        }
        if (k + 1 < network.depth()) input = propagate_activity(fwd.activations, k);
    }
}

}  // namespace

std::vector<int> goodness_predict_batch(const FFNetwork& network,
                                        std::span<const ImageVector> images,
                                        bool include_first_layer) {
    const std::size_t count = images.size();
    std::vector<int> predictions(count, 0);
    if (count == 0) return predictions;

    std::vector<double> best(count, -std::numeric_limits<double>::infinity());
    std::vector<double> scores(count);
    Matrix2D input(count, kImagePixels);
    for (int label = 0; label < kNumClasses; ++label) {
        for (std::size_t i = 0; i < count; ++i) {
            ImageVector embedded = embed_label(images[i], label);
            std::copy(embedded.pixels.begin(), embedded.pixels.end(), input.row(i).begin());
        }
        std::fill(scores.begin(), scores.end(), 0.0);
        accumulate_goodness(network, input, include_first_layer, scores);
        for (std::size_t i = 0; i < count; ++i) {
            // Strict comparison keeps the lowest class on ties.
            if (scores[i] > best[i]) {
                best[i] = scores[i];
                predictions[i] = label;
            }
        }
    }
    return predictions;
}

int goodness_predict(const FFNetwork& network, const ImageVector& image,
                     bool include_first_layer) {
    return goodness_predict_batch(network, std::span(&image, 1), include_first_layer)[0];
}

double goodness_scan_accuracy(const FFNetwork& network, const DatasetSplit& split,
                              bool include_first_layer) {
    if (split.size() == 0) throw InvalidArgument("goodness_scan_accuracy: empty split");
    constexpr std::size_t kChunk = 2048;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < split.size(); start += kChunk) {
        std::size_t end = std::min(start + kChunk, split.size());
        std::span<const ImageVector> chunk(split.images.data() + start, end - start);
        std::vector<int> predicted = goodness_predict_batch(network, chunk, include_first_layer);
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            if (predicted[i] == split.labels[start + i]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(split.size());
}

namespace {

constexpr char kCheckpointMagic[4] = {'F', 'F', 'D', 'N'};
constexpr std::uint32_t kCheckpointVersion = 1;

void write_bytes(std::ofstream& out, const void* data, std::size_t size) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void read_bytes(std::ifstream& in, void* data, std::size_t size) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (in.gcount() != static_cast<std::streamsize>(size)) {
        throw CheckpointError("checkpoint truncated");
    }
}

template <typename T>
void write_value(std::ofstream& out, T value) {
    write_bytes(out, &value, sizeof(value));
}

template <typename T>
T read_value(std::ifstream& in) {
    T value;
    read_bytes(in, &value, sizeof(value));
    return value;
}

}  // namespace

void save_network(const FFNetwork& network, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path.string());
    write_bytes(out, kCheckpointMagic, sizeof(kCheckpointMagic));
    write_value(out, kCheckpointVersion);
    write_value(out, network.peer_norm_weight);
    write_value(out, network.peer_norm_momentum);
    write_value(out, static_cast<std::uint32_t>(network.depth()));
    for (const FFLayer& layer : network.layers) {
        write_value(out, static_cast<std::uint64_t>(layer.fan_in()));
        write_value(out, static_cast<std::uint64_t>(layer.width()));
        write_value(out, layer.goodness.threshold);
        write_bytes(out, layer.weights.data(), layer.weights.size() * sizeof(double));
        write_bytes(out, layer.biases.data(), layer.biases.size() * sizeof(double));
        write_bytes(out, layer.peer_running_mean.data(),
                    layer.peer_running_mean.size() * sizeof(double));
    }
    if (!out) throw CheckpointError("write failed: " + path.string());
}

FFNetwork load_network(const std::filesystem::path& path, const SgdConfig& sgd) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
    char magic[4];
    read_bytes(in, magic, sizeof(magic));
    if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw CheckpointError("not a network checkpoint: " + path.string());
    }
    auto version = read_value<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    FFNetwork net;
    net.peer_norm_weight = read_value<double>(in);
    net.peer_norm_momentum = read_value<double>(in);
    auto depth = read_value<std::uint32_t>(in);
    net.layers.reserve(depth);
    for (std::uint32_t k = 0; k < depth; ++k) {
        auto fan_in = static_cast<std::size_t>(read_value<std::uint64_t>(in));
        auto width = static_cast<std::size_t>(read_value<std::uint64_t>(in));
        if (fan_in == 0 || width == 0) throw CheckpointError("checkpoint layer with zero extent");
        FFLayer layer;
        layer.goodness.threshold = read_value<double>(in);
        layer.weights = Matrix2D(fan_in, width);
        read_bytes(in, layer.weights.data(), layer.weights.size() * sizeof(double));
        layer.biases.resize(width);
        read_bytes(in, layer.biases.data(), width * sizeof(double));
        layer.peer_running_mean.resize(width);
        read_bytes(in, layer.peer_running_mean.data(), width * sizeof(double));
        layer.opt_weights = OptimizerState(sgd, fan_in * width);
        layer.opt_biases = OptimizerState(sgd, width);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

}  // namespace ffdyn
