#include "ffdyn/metrics.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

#include "ffdyn/errors.hpp"

namespace ffdyn {

std::string format_metric_value(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.9g", value);
    return buffer;
}

bool metric_row_less(const MetricRow& a, const MetricRow& b) {
    return std::tie(a.run_id, a.epoch, a.layer_index, a.metric) <
           std::tie(b.run_id, b.epoch, b.layer_index, b.metric);
}

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw CsvError("cannot open for writing: " + path.string());
    out << kMetricsCsvHeader << '\n';
    for (const MetricRow& row : rows) {
        out << row.run_id << ',' << row.seed << ',' << row.num_layers << ',' << row.hidden_dim
            << ',' << row.epoch << ',' << row.layer_index << ',' << row.metric << ','
            << format_metric_value(row.value) << '\n';
    }
    if (!out) throw CsvError("write failed: " + path.string());
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::uint64_t parse_count(const std::string& text, std::size_t line_no, const char* what) {
    std::size_t used = 0;
    std::uint64_t value = 0;
    try {
        value = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty()) {
        throw CsvError("line " + std::to_string(line_no) + ": bad " + what + " '" + text + "'");
    }
    return value;
}

double parse_value(const std::string& text, std::size_t line_no) {
    const char* begin = text.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end != begin + text.size() || text.empty()) {
        throw CsvError("line " + std::to_string(line_no) + ": bad value '" + text + "'");
    }
    return value;
}

}  // namespace

std::vector<MetricRow> load_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMetricsCsvHeader) {
        throw CsvError("unexpected header '" + line + "' in " + path.string());
    }

    std::vector<MetricRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 8) {
            throw CsvError("line " + std::to_string(line_no) + ": expected 8 fields, got " +
                           std::to_string(fields.size()));
        }
        MetricRow row;
        row.run_id = fields[0];
        row.seed = parse_count(fields[1], line_no, "seed");
        row.num_layers = parse_count(fields[2], line_no, "num_layers");
        row.hidden_dim = parse_count(fields[3], line_no, "hidden_dim");
        row.epoch = parse_count(fields[4], line_no, "epoch");
        row.layer_index = parse_count(fields[5], line_no, "layer_index");
        row.metric = fields[6];
        if (row.metric != "layer_accuracy" && row.metric != "layer_loss" &&
            row.metric != "overall_accuracy") {
            throw CsvError("line " + std::to_string(line_no) + ": unknown metric '" + row.metric +
                           "'");
        }
        row.value = parse_value(fields[7], line_no);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += '"';
    return quoted;
}

}  // namespace ffdyn
