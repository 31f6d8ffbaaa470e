#include "ffdyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "ffdyn/errors.hpp"
#include "ffdyn/svg.hpp"

namespace ffdyn {

std::string to_string(const ConfigKey& key) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "l%02llu_h%04llu",
                  static_cast<unsigned long long>(key.num_layers),
                  static_cast<unsigned long long>(key.hidden_dim));
    return buffer;
}

namespace {

using CellMap = std::map<std::size_t, double>;            // epoch -> value
using SeedMap = std::map<std::uint64_t, CellMap>;         // seed -> epochs
using GroupKey = std::pair<ConfigKey, std::size_t>;       // (config, layer_index)

bool is_accuracy_row(const MetricRow& row) {
    return (row.metric == "layer_accuracy" && row.layer_index >= 1) ||
           (row.metric == "overall_accuracy" && row.layer_index == 0);
}

// Keys must be exactly 1..E.
void check_contiguous(const CellMap& epochs, const std::string& where) {
    if (epochs.empty()) throw StatError(where + ": no epochs");
    if (epochs.begin()->first != 1 || epochs.rbegin()->first != epochs.size()) {
        throw StatError(where + ": epochs are not contiguous from 1");
    }
}

std::map<GroupKey, SeedMap> group_accuracy_rows(const std::vector<MetricRow>& rows) {
    std::map<GroupKey, SeedMap> groups;
    for (const MetricRow& row : rows) {
        if (!is_accuracy_row(row)) continue;
        GroupKey key{{row.num_layers, row.hidden_dim}, row.layer_index};
        auto [it, inserted] =
            groups[key][row.seed].emplace(row.epoch, row.value);
        if (!inserted) {
            throw StatError("duplicate row for " + to_string(key.first) + " layer " +
                            std::to_string(key.second) + " seed " + std::to_string(row.seed) +
                            " epoch " + std::to_string(row.epoch));
        }
    }
    return groups;
}

}  // namespace

std::vector<AccuracyCurve> aggregate_curves(const std::vector<MetricRow>& rows) {
    std::map<GroupKey, SeedMap> groups = group_accuracy_rows(rows);
    if (groups.empty()) throw StatError("no accuracy rows to aggregate");

    std::vector<AccuracyCurve> curves;
    curves.reserve(groups.size());
    for (const auto& [group_key, seeds] : groups) {
        const std::string where =
            to_string(group_key.first) + " layer " + std::to_string(group_key.second);
        const std::size_t epoch_count = seeds.begin()->second.size();
        for (const auto& [seed, epochs] : seeds) {
            check_contiguous(epochs, where + " seed " + std::to_string(seed));
            if (epochs.size() != epoch_count) {
                throw StatError(where + ": runs disagree on epoch coverage");
            }
        }

        AccuracyCurve curve;
        curve.key = group_key.first;
        curve.layer_index = group_key.second;
        curve.n_runs = seeds.size();
        curve.mean.resize(epoch_count);
        curve.stddev.resize(epoch_count);
        const double n = static_cast<double>(seeds.size());
        for (std::size_t e = 1; e <= epoch_count; ++e) {
            double sum = 0.0;
            for (const auto& [seed, epochs] : seeds) sum += epochs.at(e);
            double mean = sum / n;
            double sq = 0.0;
            for (const auto& [seed, epochs] : seeds) {
                double d = epochs.at(e) - mean;
                sq += d * d;
            }
            curve.mean[e - 1] = mean;
            curve.stddev[e - 1] = seeds.size() < 2 ? 0.0 : std::sqrt(sq / (n - 1.0));
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

std::optional<std::size_t> compute_delay(std::span<const double> accuracy_by_epoch,
                                         double target) {
    if (accuracy_by_epoch.empty()) throw InvalidArgument("compute_delay: empty curve");
    if (target <= 0.0 || target >= 1.0) {
        throw InvalidArgument("compute_delay: target must lie in (0, 1)");
    }
    for (std::size_t e = 0; e < accuracy_by_epoch.size(); ++e) {
        if (accuracy_by_epoch[e] >= target) return e + 1;
    }
    return std::nullopt;
}

std::vector<DelayCurve> delay_curves(const std::vector<AccuracyCurve>& curves, double target) {
    std::map<ConfigKey, std::map<std::size_t, std::optional<std::size_t>>> by_key;
    for (const AccuracyCurve& curve : curves) {
        if (curve.layer_index == 0) continue;  // overall rows have no depth position
        by_key[curve.key][curve.layer_index] = compute_delay(curve.mean, target);
    }
    if (by_key.empty()) throw StatError("no per-layer curves to compute delays from");

    std::vector<DelayCurve> result;
    result.reserve(by_key.size());
    for (const auto& [key, layers] : by_key) {
        if (layers.begin()->first != 1 || layers.rbegin()->first != layers.size()) {
            throw StatError("layer curves for " + to_string(key) +
                            " are not contiguous from layer 1");
        }
        DelayCurve dc;
        dc.key = key;
        dc.target = target;
        dc.delay_by_layer.resize(layers.size());
        for (const auto& [layer, delay] : layers) dc.delay_by_layer[layer - 1] = delay;
        result.push_back(std::move(dc));
    }
    return result;
}

std::vector<PerSeedDelays> per_seed_delays(const std::vector<MetricRow>& rows, double target) {
    std::map<GroupKey, SeedMap> groups = group_accuracy_rows(rows);
    std::vector<PerSeedDelays> result;
    for (const auto& [group_key, seeds] : groups) {
        if (group_key.second == 0) continue;
        PerSeedDelays entry;
        entry.key = group_key.first;
        entry.target = target;
        entry.layer_index = group_key.second;
        for (const auto& [seed, epochs] : seeds) {
            check_contiguous(epochs, to_string(entry.key) + " seed " + std::to_string(seed));
            std::vector<double> curve;
            curve.reserve(epochs.size());
            for (const auto& [epoch, value] : epochs) curve.push_back(value);
            entry.by_seed.emplace_back(seed, compute_delay(curve, target));
        }
        result.push_back(std::move(entry));
    }
    if (result.empty()) throw StatError("no per-layer accuracy rows");
    return result;
}

double pearson(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 2) throw StatError("pearson needs at least 2 pairs");
    const double n = static_cast<double>(pairs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& [x, y] : pairs) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pairs) {
        double dx = x - mean_x, dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw StatError("correlation undefined: a coordinate is constant");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

// Average (fractional) ranks, 1-based; exact ties share their mean rank.
std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
        i = j;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 2) throw StatError("spearman needs at least 2 pairs");
    std::vector<double> xs(pairs.size()), ys(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        xs[i] = pairs[i].first;
        ys[i] = pairs[i].second;
    }
    std::vector<double> rx = average_ranks(xs);
    std::vector<double> ry = average_ranks(ys);
    std::vector<std::pair<double, double>> ranked(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) ranked[i] = {rx[i], ry[i]};
    return pearson(ranked);
}

std::vector<CorrelationResult> layer_model_correlation(const std::vector<MetricRow>& rows,
                                                       const ConfigKey& key) {
    std::map<std::pair<std::uint64_t, std::size_t>, double> overall;  // (seed, epoch)
    std::map<std::size_t, std::map<std::pair<std::uint64_t, std::size_t>, double>> layers;
    for (const MetricRow& row : rows) {
        if (row.num_layers != key.num_layers || row.hidden_dim != key.hidden_dim) continue;
        if (row.metric == "overall_accuracy" && row.layer_index == 0) {
            overall[{row.seed, row.epoch}] = row.value;
        } else if (row.metric == "layer_accuracy" && row.layer_index >= 1) {
            layers[row.layer_index][{row.seed, row.epoch}] = row.value;
        }
    }
    if (layers.empty() || overall.empty()) {
        throw StatError("no rows for config " + to_string(key));
    }

    std::vector<CorrelationResult> results;
    results.reserve(layers.size());
    for (const auto& [layer_index, cells] : layers) {
        std::vector<std::pair<double, double>> pairs;
        pairs.reserve(cells.size());
        for (const auto& [cell, layer_value] : cells) {
            auto it = overall.find(cell);
            if (it != overall.end()) pairs.emplace_back(layer_value, it->second);
        }
        if (pairs.size() < 2) {
            throw StatError("config " + to_string(key) + " layer " +
                            std::to_string(layer_index) + ": fewer than 2 (run, epoch) cells");
        }
        CorrelationResult r;
        r.key = key;
        r.layer_index = layer_index;
        r.pearson_r = pearson(pairs);
        r.spearman_rho = spearman(pairs);
        r.n_pairs = pairs.size();
        r.strong = std::abs(r.pearson_r) > 0.7 || std::abs(r.spearman_rho) > 0.7;
        results.push_back(r);
    }
    return results;
}

namespace {

std::ofstream open_export(const std::filesystem::path& out_dir,
                          const std::filesystem::path& name,
                          std::filesystem::path& full_path) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create directory " + out_dir.string() + ": " + ec.message());
    full_path = out_dir / name;
    std::ofstream out(full_path, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + full_path.string());
    return out;
}

std::string delay_field(const std::optional<std::size_t>& delay) {
    return delay ? std::to_string(*delay) : std::string("not_reached");
}

}  // namespace

std::filesystem::path export_curves_csv(const std::vector<AccuracyCurve>& curves,
                                        const std::filesystem::path& out_dir) {
    if (curves.empty()) throw InvalidArgument("export_curves_csv: nothing to export");
    std::filesystem::path path;
    std::ofstream out = open_export(out_dir, "accuracy_curves.csv", path);
    out << "config,layer_index,epoch,mean_accuracy,std_accuracy,n_runs\n";
    for (const AccuracyCurve& curve : curves) {
        for (std::size_t e = 0; e < curve.mean.size(); ++e) {
            out << to_string(curve.key) << ',' << curve.layer_index << ',' << e + 1 << ','
                << format_metric_value(curve.mean[e]) << ','
                << format_metric_value(curve.stddev[e]) << ',' << curve.n_runs << '\n';
        }
    }
    if (!out) throw Error("write failed: " + path.string());
    return path;
}

std::filesystem::path export_delays_csv(const std::vector<DelayCurve>& delays,
                                        const std::filesystem::path& out_dir) {
    if (delays.empty()) throw InvalidArgument("export_delays_csv: nothing to export");
    std::filesystem::path path;
    std::ofstream out = open_export(out_dir, "delay_curves.csv", path);
    out << "config,layer_index,target,delay_epoch\n";
    for (const DelayCurve& dc : delays) {
        for (std::size_t k = 0; k < dc.delay_by_layer.size(); ++k) {
            out << to_string(dc.key) << ',' << k + 1 << ',' << format_metric_value(dc.target)
                << ',' << delay_field(dc.delay_by_layer[k]) << '\n';
        }
    }
    if (!out) throw Error("write failed: " + path.string());
    return path;
}

std::filesystem::path export_per_seed_delays_csv(const std::vector<PerSeedDelays>& delays,
                                                 const std::filesystem::path& out_dir) {
    if (delays.empty()) throw InvalidArgument("export_per_seed_delays_csv: nothing to export");
    std::filesystem::path path;
    std::ofstream out = open_export(out_dir, "per_seed_delays.csv", path);
    out << "config,layer_index,target,seed,delay_epoch\n";
    for (const PerSeedDelays& entry : delays) {
        for (const auto& [seed, delay] : entry.by_seed) {
            out << to_string(entry.key) << ',' << entry.layer_index << ','
                << format_metric_value(entry.target) << ',' << seed << ',' << delay_field(delay)
                << '\n';
        }
    }
    if (!out) throw Error("write failed: " + path.string());
    return path;
}

std::filesystem::path export_correlations_csv(const std::vector<CorrelationResult>& results,
                                              const std::filesystem::path& out_dir,
                                              const std::string& overall_method) {
    if (results.empty()) throw InvalidArgument("export_correlations_csv: nothing to export");
    std::filesystem::path path;
    std::ofstream out = open_export(out_dir, "layer_model_correlations.csv", path);
    out << "config,layer_index,n_pairs,pearson_r,spearman_rho,strong,overall_method\n";
    for (const CorrelationResult& r : results) {
        out << to_string(r.key) << ',' << r.layer_index << ',' << r.n_pairs << ','
            << format_metric_value(r.pearson_r) << ',' << format_metric_value(r.spearman_rho)
            << ',' << (r.strong ? "true" : "false") << ',' << csv_escape(overall_method) << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
    return path;
}

std::vector<std::filesystem::path> export_curve_charts(const std::vector<AccuracyCurve>& curves,
                                                       const std::filesystem::path& out_dir) {
    if (curves.empty()) throw InvalidArgument("export_curve_charts: nothing to export");
    std::map<ConfigKey, std::vector<const AccuracyCurve*>> by_key;
    for (const AccuracyCurve& curve : curves) by_key[curve.key].push_back(&curve);

    std::vector<std::filesystem::path> written;
    for (const auto& [key, group] : by_key) {
        std::vector<ChartSeries> series;
        for (const AccuracyCurve* curve : group) {
            ChartSeries s;
            s.label = curve->layer_index == 0 ? "overall"
                                              : "layer " + std::to_string(curve->layer_index);
            for (std::size_t e = 0; e < curve->mean.size(); ++e) {
                s.xs.push_back(static_cast<double>(e + 1));
                s.ys.push_back(curve->mean[e]);
            }
            s.band = curve->stddev;
            series.push_back(std::move(s));
        }
        std::string svg = render_line_chart("accuracy by epoch, " + to_string(key), "epoch",
                                            "accuracy", series);
        std::filesystem::path path;
        std::ofstream out =
            open_export(out_dir, "accuracy_curves_" + to_string(key) + ".svg", path);
        out << svg;
        if (!out) throw Error("write failed: " + path.string());
        written.push_back(path);
    }
    return written;
}

std::vector<std::filesystem::path> export_delay_charts(const std::vector<DelayCurve>& delays,
                                                       const std::filesystem::path& out_dir) {
    if (delays.empty()) throw InvalidArgument("export_delay_charts: nothing to export");
    std::vector<std::filesystem::path> written;
    for (const DelayCurve& dc : delays) {
        ChartSeries s;
        s.label = "target " + format_metric_value(dc.target);
        for (std::size_t k = 0; k < dc.delay_by_layer.size(); ++k) {
            if (!dc.delay_by_layer[k]) continue;  // unreachable layers are simply absent
            s.xs.push_back(static_cast<double>(k + 1));
            s.ys.push_back(static_cast<double>(*dc.delay_by_layer[k]));
        }
        if (s.xs.empty()) continue;
        std::string svg = render_line_chart("delay to target, " + to_string(dc.key),
                                            "layer depth", "epoch reaching target", {s});
        std::filesystem::path path;
        std::ofstream out =
            open_export(out_dir, "delay_curve_" + to_string(dc.key) + ".svg", path);
        out << svg;
        if (!out) throw Error("write failed: " + path.string());
        written.push_back(path);
    }
    return written;
}

}  // namespace ffdyn
