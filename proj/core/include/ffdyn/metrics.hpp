#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ffdyn {

// One cell of the long-format metrics table. layer_index is 1-based for
// per-layer metrics and 0 for overall-model rows.
struct MetricRow {
    std::string run_id;
    std::uint64_t seed = 0;
    std::size_t num_layers = 0;
    std::size_t hidden_dim = 0;
    std::size_t epoch = 0;
    std::size_t layer_index = 0;
    std::string metric;  // layer_accuracy | layer_loss | overall_accuracy
    double value = 0.0;
};

inline const char* kMetricsCsvHeader =
    "run_id,seed,num_layers,hidden_dim,epoch,layer_index,metric,value";

// 9 significant digits, shortest form ("%.9g").
std::string format_metric_value(double value);

// Canonical row order: (run_id, epoch, layer_index, metric).
bool metric_row_less(const MetricRow& a, const MetricRow& b);

// Writes header + rows as given (callers sort first). "\n" line ends.
void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path);

// Throws CsvError naming the line on any malformed content.
std::vector<MetricRow> load_metrics_csv(const std::filesystem::path& path);

// Minimal CSV field quoting for free-text columns (error messages).
std::string csv_escape(const std::string& field);

}  // namespace ffdyn
