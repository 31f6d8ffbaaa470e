#include "ffdyn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "ffdyn/downstream.hpp"
#include "ffdyn/errors.hpp"
#include "ffdyn/network.hpp"

namespace ffdyn {

std::string to_string(OverallMethod method) {
    return method == OverallMethod::downstream ? "downstream" : "goodness_scan";
}

OverallMethod overall_method_from_string(const std::string& name) {
    if (name == "downstream") return OverallMethod::downstream;
    if (name == "goodness_scan") return OverallMethod::goodness_scan;
    throw ConfigError("overall_method must be 'downstream' or 'goodness_scan', got '" + name +
                      "'");
}

void validate(const ExperimentConfig& config) {
    auto require = [](bool ok, const char* message) {
        if (!ok) throw ConfigError(message);
    };
    require(config.seed >= 1, "seed must be >= 1");
    require(config.batch_size >= 1, "batch_size must be >= 1");
    require(config.hidden_dim >= 1, "hidden_dim must be >= 1");
    require(config.num_layers >= 1, "hidden_layers must be >= 1");
    require(config.epochs >= 1, "epochs must be >= 1");
    require(config.learning_rate >= 0.0, "learning_rate must be >= 0");
    require(config.weight_decay >= 0.0, "weight_decay must be >= 0");
    require(config.momentum >= 0.0, "momentum must be >= 0");
    require(config.peer_normalization >= 0.0, "peer_normalization must be >= 0");
    require(config.peer_normalization_momentum >= 0.0 &&
                config.peer_normalization_momentum <= 1.0,
            "peer_normalization_momentum must lie in [0, 1]");
    require(config.downstream_learning_rate >= 0.0, "downstream_learning_rate must be >= 0");
    require(config.downstream_weight_decay >= 0.0, "downstream_weight_decay must be >= 0");
    require(config.target_accuracy > 0.0 && config.target_accuracy < 1.0,
            "target_accuracy must lie in (0, 1)");
}

std::string run_id_for(const ExperimentConfig& config) {
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "l%02llu_h%04llu_s%02llu",
                  static_cast<unsigned long long>(config.num_layers),
                  static_cast<unsigned long long>(config.hidden_dim),
                  static_cast<unsigned long long>(config.seed));
    return buffer;
}

namespace {

std::uint64_t parse_config_u64(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    std::uint64_t value = 0;
    try {
        value = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty() || text[0] == '-') {
        throw ConfigError("config key '" + key + "': bad integer '" + text + "'");
    }
    return value;
}

double parse_config_double(const std::string& key, const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (text.empty() || end != begin + text.size() || !std::isfinite(value)) {
        throw ConfigError("config key '" + key + "': bad number '" + text + "'");
    }
    return value;
}

}  // namespace

void set_config_value(ExperimentConfig& config, const std::string& key,
                      const std::string& value) {
    if (key == "seed") config.seed = parse_config_u64(key, value);
    else if (key == "batch_size") config.batch_size = parse_config_u64(key, value);
    else if (key == "hidden_dim") config.hidden_dim = parse_config_u64(key, value);
    else if (key == "hidden_layers") config.num_layers = parse_config_u64(key, value);
    else if (key == "epochs") config.epochs = parse_config_u64(key, value);
    else if (key == "learning_rate") config.learning_rate = parse_config_double(key, value);
    else if (key == "weight_decay") config.weight_decay = parse_config_double(key, value);
    else if (key == "momentum") config.momentum = parse_config_double(key, value);
    else if (key == "peer_normalization")
        config.peer_normalization = parse_config_double(key, value);
    else if (key == "peer_normalization_momentum")
        config.peer_normalization_momentum = parse_config_double(key, value);
    else if (key == "downstream_learning_rate")
        config.downstream_learning_rate = parse_config_double(key, value);
    else if (key == "downstream_weight_decay")
        config.downstream_weight_decay = parse_config_double(key, value);
    else if (key == "target_accuracy") config.target_accuracy = parse_config_double(key, value);
    else if (key == "overall_method") config.overall_method = overall_method_from_string(value);
    else throw ConfigError("unknown config key '" + key + "'");
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
    std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must look like key=value, got '" + assignment + "'");
    }
    set_config_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

namespace {

// Scalars become the string form set_config_value parses, so the JSON
// path and the key=value path share one dispatcher.
void apply_json_object(ExperimentConfig& config, const nlohmann::json& object) {
    if (!object.is_object()) throw ConfigError("config JSON must be an object");
    for (const auto& [key, value] : object.items()) {
        if (value.is_string()) {
            set_config_value(config, key, value.get<std::string>());
        } else if (value.is_number() || value.is_boolean()) {
            set_config_value(config, key, value.dump());
        } else {
            throw ConfigError("config key '" + key + "': expected a scalar");
        }
    }
}

nlohmann::json parse_json_or_config_error(const std::string& text, const std::string& what) {
    nlohmann::json parsed = nlohmann::json::parse(text, nullptr, false);
    if (parsed.is_discarded()) throw ConfigError("malformed JSON in " + what);
    return parsed;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    ExperimentConfig config;
    apply_json_object(config, parse_json_or_config_error(text, "config"));
    return config;
}

ExperimentConfig config_from_json_file(const std::filesystem::path& path) {
    ExperimentConfig config;
    apply_json_object(config, parse_json_or_config_error(read_text_file(path), path.string()));
    return config;
}

std::vector<MetricRow> metric_rows(const EpochMetrics& metrics) {
    if (metrics.per_layer_accuracy.size() != metrics.num_layers ||
        metrics.per_layer_loss.size() != metrics.num_layers) {
        throw InvalidArgument("metric_rows: per-layer lists must have length num_layers");
    }
    if (metrics.epoch == 0) throw InvalidArgument("metric_rows: epoch is 1-based");
    for (double a : metrics.per_layer_accuracy) {
        if (a < 0.0 || a > 1.0) throw InvalidArgument("metric_rows: accuracy outside [0, 1]");
    }
    if (metrics.overall_accuracy < 0.0 || metrics.overall_accuracy > 1.0) {
        throw InvalidArgument("metric_rows: accuracy outside [0, 1]");
    }

    std::vector<MetricRow> rows;
    rows.reserve(2 * metrics.num_layers + 1);
    MetricRow base;
    base.run_id = metrics.run_id;
    base.seed = metrics.seed;
    base.num_layers = metrics.num_layers;
    base.hidden_dim = metrics.hidden_dim;
    base.epoch = metrics.epoch;

    MetricRow overall = base;
    overall.layer_index = 0;
    overall.metric = "overall_accuracy";
    overall.value = metrics.overall_accuracy;
    rows.push_back(overall);
    for (std::size_t k = 0; k < metrics.num_layers; ++k) {
        MetricRow acc = base;
        acc.layer_index = k + 1;
        acc.metric = "layer_accuracy";
        acc.value = metrics.per_layer_accuracy[k];
        rows.push_back(acc);
        MetricRow loss = base;
        loss.layer_index = k + 1;
        loss.metric = "layer_loss";
        loss.value = metrics.per_layer_loss[k];
        rows.push_back(loss);
    }
    return rows;
}

std::vector<EpochMetrics> run_experiment(const ExperimentConfig& config, const MnistData& data,
                                         const EpochCallback& on_epoch) {
    return run_experiment_keep(config, data, on_epoch).metrics;
}

TrainedRun run_experiment_keep(const ExperimentConfig& config, const MnistData& data,
                               const EpochCallback& on_epoch) {
    validate(config);
    if (data.train.size() == 0 || data.test.size() == 0) {
        throw InvalidArgument("run_experiment: dataset splits must be non-empty");
    }

    const std::string run_id = run_id_for(config);
    const std::vector<std::size_t> widths(config.num_layers, config.hidden_dim);
    const SgdConfig layer_sgd{config.learning_rate, config.momentum, config.weight_decay};
    const SgdConfig downstream_sgd{config.downstream_learning_rate, config.momentum,
                                   config.downstream_weight_decay};

    Rng init_rng(derive_seed(config.seed, "init"));
    FFNetwork network = make_network(kImagePixels, widths, layer_sgd, config.peer_normalization,
                                     config.peer_normalization_momentum, init_rng);
    DownstreamClassifier classifier = make_downstream(network, downstream_sgd);

    Rng batch_rng(derive_seed(config.seed, "batches"));
    const std::uint64_t eval_seed = derive_seed(config.seed, "eval");

    std::vector<EpochMetrics> history;
    history.reserve(config.epochs);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        auto started = std::chrono::steady_clock::now();
        EpochMetrics em;
        em.run_id = run_id;
        em.seed = config.seed;
        em.num_layers = config.num_layers;
        em.hidden_dim = config.hidden_dim;
        em.epoch = epoch;
        try {
            BatchStream train_stream(data.train, config.batch_size, batch_rng);
            em.per_layer_loss = train_epoch(network, train_stream);
            train_downstream_epoch(classifier, network, data.train, config.batch_size);
        } catch (const DivergenceError& error) {
            throw DivergenceError(error.layer_index(), epoch,
                                  std::string(error.what()) + " at epoch " +
                                      std::to_string(epoch));
        }

        // Fixed evaluation seed: every epoch is measured on the same
        // test-derived positive/negative batches.
        Rng eval_rng(eval_seed);
        BatchStream eval_stream(data.test, config.batch_size, eval_rng);
        std::vector<LayerAccuracyStats> stats = layer_accuracy(network, eval_stream);
        em.per_layer_accuracy.reserve(stats.size());
        for (const LayerAccuracyStats& s : stats) em.per_layer_accuracy.push_back(s.accuracy);

        em.overall_accuracy = config.overall_method == OverallMethod::downstream
                                  ? overall_accuracy(classifier, network, data.test)
                                  : goodness_scan_accuracy(network, data.test);
        em.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (on_epoch) on_epoch(em);
        history.push_back(std::move(em));
    }
    return {std::move(history), std::move(network), std::move(classifier)};
}

SweepPlan desk_small_plan(std::filesystem::path output_dir) {
    SweepPlan plan;
    plan.output_dir = std::move(output_dir);
    for (std::size_t layers : {2, 4}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            ExperimentConfig config;
            config.hidden_dim = 100;
            config.num_layers = layers;
            config.seed = seed;
            plan.configs.push_back(config);
        }
    }
    return plan;
}

SweepPlan paper_full_plan(std::filesystem::path output_dir) {
    SweepPlan plan;
    plan.output_dir = std::move(output_dir);
    for (std::size_t dim : kGridHiddenDims) {
        for (std::size_t layers : kGridNumLayers) {
            for (std::uint64_t seed = 1; seed <= kGridSeedCount; ++seed) {
                ExperimentConfig config;
                config.hidden_dim = dim;
                config.num_layers = layers;
                config.seed = seed;
                plan.configs.push_back(config);
            }
        }
    }
    return plan;
}

SweepPlan plan_from_json_file(const std::filesystem::path& plan_path,
                              std::filesystem::path output_dir) {
    nlohmann::json doc =
        parse_json_or_config_error(read_text_file(plan_path), plan_path.string());
    if (!doc.is_object()) throw ConfigError("plan JSON must be an object");

    ExperimentConfig base;
    if (doc.contains("base")) apply_json_object(base, doc["base"]);

    SweepPlan plan;
    plan.output_dir = std::move(output_dir);

    if (doc.contains("grid")) {
        const nlohmann::json& grid = doc["grid"];
        if (!grid.is_object()) throw ConfigError("plan 'grid' must be an object");
        auto axis = [&](const char* key, std::vector<std::uint64_t> fallback) {
            if (!grid.contains(key)) return fallback;
            const nlohmann::json& node = grid[key];
            std::vector<std::uint64_t> values;
            if (node.is_number_unsigned() || node.is_number_integer()) {
                auto n = node.get<std::int64_t>();
                if (n < 1) throw ConfigError(std::string("plan grid '") + key + "' must be >= 1");
                for (std::int64_t i = 1; i <= n; ++i) values.push_back(static_cast<std::uint64_t>(i));
            } else if (node.is_array()) {
                for (const auto& v : node) {
                    if ((!v.is_number_integer() && !v.is_number_unsigned()) ||
                        v.get<std::int64_t>() < 1) {
                        throw ConfigError(std::string("plan grid '") + key +
                                          "' must hold integers >= 1");
                    }
                    values.push_back(v.get<std::uint64_t>());
                }
            } else {
                throw ConfigError(std::string("plan grid '") + key +
                                  "' must be an integer or an array");
            }
            if (values.empty()) {
                throw ConfigError(std::string("plan grid '") + key + "' is empty");
            }
            return values;
        };
        std::vector<std::uint64_t> seeds = axis("seeds", {base.seed});
        std::vector<std::uint64_t> dims = axis("hidden_dims", {base.hidden_dim});
        std::vector<std::uint64_t> depths = axis("hidden_layers", {base.num_layers});
        for (std::uint64_t dim : dims) {
            for (std::uint64_t depth : depths) {
                for (std::uint64_t seed : seeds) {
                    ExperimentConfig config = base;
                    config.hidden_dim = static_cast<std::size_t>(dim);
                    config.num_layers = static_cast<std::size_t>(depth);
                    config.seed = seed;
                    plan.configs.push_back(config);
                }
            }
        }
    }

    if (doc.contains("configs")) {
        const nlohmann::json& configs = doc["configs"];
        if (!configs.is_array()) throw ConfigError("plan 'configs' must be an array");
        for (const auto& entry : configs) {
            ExperimentConfig config = base;
            apply_json_object(config, entry);
            plan.configs.push_back(config);
        }
    }

    validate_plan(plan);
    return plan;
}

void validate_plan(const SweepPlan& plan) {
    if (plan.configs.empty()) throw ConfigError("plan contains no runs");
    std::set<std::string> seen;
    for (const ExperimentConfig& config : plan.configs) {
        validate(config);
        std::string id = run_id_for(config);
        if (!seen.insert(id).second) throw ConfigError("duplicate run id '" + id + "' in plan");
    }
}

namespace {

struct RunSlot {
    std::vector<EpochMetrics> metrics;
    std::string error;  // empty means success
    bool failed = false;
};

void manifest_line(std::ostream& out, const ExperimentConfig& config, bool ok) {
    out << run_id_for(config) << ',' << config.seed << ',' << config.num_layers << ','
        << config.hidden_dim << ',' << config.epochs << ',' << to_string(config.overall_method)
        << ',' << (ok ? "ok" : "failed") << '\n';
}

void write_manifest(const SweepPlan& plan, const std::vector<RunSlot>& slots,
                    const std::filesystem::path& path) {
    std::vector<std::size_t> order(plan.configs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return run_id_for(plan.configs[a]) < run_id_for(plan.configs[b]);
    });

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << kManifestCsvHeader << '\n';
    for (std::size_t i : order) {
        manifest_line(out, plan.configs[i], !slots[i].failed);
    }
}

void write_failures(const SweepPlan& plan, const std::vector<RunSlot>& slots,
                    const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::string>> failures;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].failed) failures.emplace_back(run_id_for(plan.configs[i]), slots[i].error);
    }
    std::sort(failures.begin(), failures.end());

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << "run_id,error\n";
    for (const auto& [run_id, error] : failures) {
        out << run_id << ',' << csv_escape(error) << '\n';
    }
}

}  // namespace

void write_run_manifest(const ExperimentConfig& config, bool ok,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << kManifestCsvHeader << '\n';
    manifest_line(out, config, ok);
}

SweepOutcome run_sweep(const SweepPlan& plan, std::size_t max_parallel, const MnistData& data,
                       const RunCallback& on_run) {
    validate_plan(plan);
    if (max_parallel == 0) max_parallel = 1;

    std::error_code ec;
    std::filesystem::create_directories(plan.output_dir, ec);
    if (ec) {
        throw Error("cannot create output directory " + plan.output_dir.string() + ": " +
                    ec.message());
    }

    std::vector<RunSlot> slots(plan.configs.size());
    std::atomic<std::size_t> next{0};
    std::mutex callback_mutex;

    auto worker = [&] {
        while (true) {
            std::size_t index = next.fetch_add(1);
            if (index >= plan.configs.size()) return;
            RunSlot& slot = slots[index];
            try {
                slot.metrics = run_experiment(plan.configs[index], data);
            } catch (const std::exception& error) {
                slot.failed = true;
                slot.error = error.what();
            }
            if (on_run) {
                std::lock_guard<std::mutex> lock(callback_mutex);
                on_run(run_id_for(plan.configs[index]), !slot.failed, slot.error);
            }
        }
    };

    std::size_t thread_count = std::min(max_parallel, plan.configs.size());
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();

    std::vector<MetricRow> rows;
    SweepOutcome outcome;
    for (const RunSlot& slot : slots) {
        if (slot.failed) {
            ++outcome.failed;
            continue;
        }
        ++outcome.succeeded;
        for (const EpochMetrics& em : slot.metrics) {
            std::vector<MetricRow> epoch_rows = metric_rows(em);
            rows.insert(rows.end(), std::make_move_iterator(epoch_rows.begin()),
                        std::make_move_iterator(epoch_rows.end()));
        }
    }
    std::sort(rows.begin(), rows.end(), metric_row_less);

    outcome.metrics_csv = plan.output_dir / "metrics.csv";
    write_metrics_csv(rows, outcome.metrics_csv);
    write_manifest(plan, slots, plan.output_dir / "manifest.csv");
    write_failures(plan, slots, plan.output_dir / "failures.csv");
    return outcome;
}

}  // namespace ffdyn
