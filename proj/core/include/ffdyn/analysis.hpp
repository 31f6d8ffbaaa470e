#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ffdyn/metrics.hpp"

namespace ffdyn {

// One cell of the experimental grid, ignoring the seed.
struct ConfigKey {
    std::size_t num_layers = 0;
    std::size_t hidden_dim = 0;

    auto operator<=>(const ConfigKey&) const = default;
};

// "l04_h0100": matches the run id prefix.
std::string to_string(const ConfigKey& key);

// Seed-averaged accuracy trajectory of one layer (or of the overall
// model when layer_index is 0). mean[e-1] belongs to epoch e.
struct AccuracyCurve {
    ConfigKey key;
    std::size_t layer_index = 0;
    std::vector<double> mean;
    std::vector<double> stddev;  // sample std (n-1); 0 when a single run
    std::size_t n_runs = 0;
};

// Groups accuracy rows by (config, layer) and aggregates over seeds.
// Every run in a group must cover the same contiguous epochs 1..E;
// anything else throws StatError.
std::vector<AccuracyCurve> aggregate_curves(const std::vector<MetricRow>& rows);

// Smallest 1-based epoch whose accuracy reaches the target, or nullopt
// when the curve never gets there.
std::optional<std::size_t> compute_delay(std::span<const double> accuracy_by_epoch,
                                         double target);

// Per-layer delay for one config, computed on the seed-averaged curves.
struct DelayCurve {
    ConfigKey key;
    double target = 0.7;
    std::vector<std::optional<std::size_t>> delay_by_layer;  // [k-1] belongs to layer k
};

std::vector<DelayCurve> delay_curves(const std::vector<AccuracyCurve>& curves, double target);

// Robustness variant: the delay of each seed's own curve, keyed by seed.
struct PerSeedDelays {
    ConfigKey key;
    double target = 0.7;
    std::size_t layer_index = 0;
    std::vector<std::pair<std::uint64_t, std::optional<std::size_t>>> by_seed;
};

std::vector<PerSeedDelays> per_seed_delays(const std::vector<MetricRow>& rows, double target);

// Sample Pearson r. Throws StatError on fewer than two pairs or a
// constant coordinate (an undefined correlation is never reported as 0).
double pearson(std::span<const std::pair<double, double>> pairs);

// Pearson over average-ranked data (ties get fractional ranks).
double spearman(std::span<const std::pair<double, double>> pairs);

struct CorrelationResult {
    ConfigKey key;
    std::size_t layer_index = 0;
    double pearson_r = 0.0;
    double spearman_rho = 0.0;
    std::size_t n_pairs = 0;
    bool strong = false;  // |r| > 0.7 or |rho| > 0.7
};

// Pairs each layer's accuracy with the overall accuracy across every
// (seed, epoch) cell of one config.
std::vector<CorrelationResult> layer_model_correlation(const std::vector<MetricRow>& rows,
                                                       const ConfigKey& key);

// Tidy per-figure-family CSVs. Inputs must be non-empty; re-exporting
// identical data yields byte-identical files.
std::filesystem::path export_curves_csv(const std::vector<AccuracyCurve>& curves,
                                        const std::filesystem::path& out_dir);
std::filesystem::path export_delays_csv(const std::vector<DelayCurve>& delays,
                                        const std::filesystem::path& out_dir);
std::filesystem::path export_per_seed_delays_csv(const std::vector<PerSeedDelays>& delays,
                                                 const std::filesystem::path& out_dir);
// overall_method labels where each config's overall-accuracy figures
// came from (e.g. "downstream"); written into every row.
std::filesystem::path export_correlations_csv(const std::vector<CorrelationResult>& results,
                                              const std::filesystem::path& out_dir,
                                              const std::string& overall_method = "unknown");

// Static SVG line charts (accuracy vs epoch with one-std bands, delay
// vs layer), one file per config key.
std::vector<std::filesystem::path> export_curve_charts(const std::vector<AccuracyCurve>& curves,
                                                       const std::filesystem::path& out_dir);
std::vector<std::filesystem::path> export_delay_charts(const std::vector<DelayCurve>& delays,
                                                       const std::filesystem::path& out_dir);

}  // namespace ffdyn
