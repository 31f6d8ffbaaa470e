#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ffdyn/downstream.hpp"
#include "ffdyn/metrics.hpp"
#include "ffdyn/mnist.hpp"
#include "ffdyn/network.hpp"

namespace ffdyn {

// How the overall-model accuracy figure is produced. The downstream
// linear head is the default; the label scan is kept for comparison.
enum class OverallMethod { downstream, goodness_scan };

std::string to_string(OverallMethod method);
OverallMethod overall_method_from_string(const std::string& name);

// The full experimental grid: 2 widths x 5 depths x 30 seeds = 300 runs.
inline constexpr std::size_t kGridHiddenDims[] = {100, 1000};
inline constexpr std::size_t kGridNumLayers[] = {2, 4, 8, 16, 32};
inline constexpr std::uint64_t kGridSeedCount = 30;

// One training run. Field defaults are the reference configuration;
// hidden_dim and num_layers default to the smallest grid point.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::size_t batch_size = 1000;
    std::size_t hidden_dim = 100;
    std::size_t num_layers = 2;
    std::size_t epochs = 30;
    double learning_rate = 1e-3;
    double weight_decay = 3e-4;
    double momentum = 0.9;
    double peer_normalization = 0.03;
    double peer_normalization_momentum = 0.09;
    double downstream_learning_rate = 1e-2;
    double downstream_weight_decay = 3e-3;
    double target_accuracy = 0.7;
    OverallMethod overall_method = OverallMethod::downstream;
};

// Throws ConfigError naming the violated invariant.
void validate(const ExperimentConfig& config);

// "l<layers>_h<dim>_s<seed>", zero-padded so lexical order is grid order.
std::string run_id_for(const ExperimentConfig& config);

// Sets one field from its config-file key (snake_case, e.g.
// hidden_layers, peer_normalization, downstream_learning_rate). Unknown
// keys and unparsable values throw ConfigError.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

// "key=value" form used by command-line overrides.
void apply_override(ExperimentConfig& config, const std::string& assignment);

// JSON object of config keys, applied over the defaults.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig config_from_json_file(const std::filesystem::path& path);

// Everything measured after one epoch. wall_time is informational and
// never serialized, so output files stay run-time independent.
struct EpochMetrics {
    std::string run_id;
    std::uint64_t seed = 0;
    std::size_t num_layers = 0;
    std::size_t hidden_dim = 0;
    std::size_t epoch = 0;  // 1-based
    std::vector<double> per_layer_accuracy;
    std::vector<double> per_layer_loss;
    double overall_accuracy = 0.0;
    double wall_time_seconds = 0.0;
};

// Long-format rows for one epoch: layer_accuracy and layer_loss per
// layer (layer_index 1..L) plus one overall_accuracy row (layer_index
// 0). Validates the EpochMetrics invariants before emitting.
std::vector<MetricRow> metric_rows(const EpochMetrics& metrics);

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Trains one configuration end to end: a fresh network and downstream
// head seeded from config.seed via labeled streams, then per epoch
// train_epoch + train_downstream_epoch followed by evaluation on
// test-derived batches (fixed evaluation seed, so every epoch sees the
// same batches). Non-finite losses abort with DivergenceError carrying
// the epoch and layer.
std::vector<EpochMetrics> run_experiment(const ExperimentConfig& config, const MnistData& data,
                                         const EpochCallback& on_epoch = {});

// Same run, but hands back the trained model alongside the metrics.
struct TrainedRun {
    std::vector<EpochMetrics> metrics;
    FFNetwork network;
    DownstreamClassifier classifier;
};

TrainedRun run_experiment_keep(const ExperimentConfig& config, const MnistData& data,
                               const EpochCallback& on_epoch = {});

struct SweepPlan {
    std::vector<ExperimentConfig> configs;
    std::filesystem::path output_dir;
};

// 5 seeds x {2,4} layers x width 100, 30 epochs: desk-scale slice that
// still shows the depth-delay effect.
SweepPlan desk_small_plan(std::filesystem::path output_dir);

// The full 300-run grid.
SweepPlan paper_full_plan(std::filesystem::path output_dir);

// Plan file: JSON with optional "base" (config keys), optional "grid"
// ({seeds, hidden_dims, hidden_layers} arrays; "seeds": n means 1..n)
// and optional explicit "configs" array; at least one run must result.
SweepPlan plan_from_json_file(const std::filesystem::path& plan_path,
                              std::filesystem::path output_dir);

// Throws ConfigError on duplicate run ids or an empty plan.
void validate_plan(const SweepPlan& plan);

struct SweepOutcome {
    std::filesystem::path metrics_csv;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
};

inline const char* kManifestCsvHeader =
    "run_id,seed,num_layers,hidden_dim,epochs,overall_method,status";

// One-line manifest for a single run (the sweep writer emits the same
// schema for whole plans).
void write_run_manifest(const ExperimentConfig& config, bool ok,
                        const std::filesystem::path& path);

using RunCallback =
    std::function<void(const std::string& run_id, bool ok, const std::string& error)>;

// Executes the plan with at most max_parallel concurrent runs. Output
// row order is sorted, so the CSV bytes do not depend on scheduling.
// Writes metrics.csv, manifest.csv (one line per run with its
// overall-accuracy method and status) and failures.csv into
// plan.output_dir. Failed runs are recorded and skipped, not fatal.
SweepOutcome run_sweep(const SweepPlan& plan, std::size_t max_parallel, const MnistData& data,
                       const RunCallback& on_run = {});

}  // namespace ffdyn
