#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nfp/errors.hpp"

namespace nfp {

// One evaluation row. Optional fields correspond to the diagnostics
// toggles; disabled diagnostics leave their CSV cells empty.
struct MetricsRecord {
    std::int64_t iteration = 0;
    std::int64_t epoch = 0;
    double loss = 0.0;
    std::string metric_name;  // mse | psnr | iou
    double metric_value = 0.0;
    double wall_ms = 0.0;  // optimizer-update time only; 0 when disabled
    std::optional<double> sparsity_global;
    std::optional<double> kappa_raw;
    std::optional<double> kappa_jacobi;
    std::optional<double> kappa_equilibrated;
};

inline constexpr const char* kMetricsHeader =
    "iteration,epoch,loss,metric_name,metric_value,wall_ms,"
    "sparsity_global,kappa_raw,kappa_jacobi,kappa_equilibrated";

namespace detail {

// Shortest decimal that round-trips the double: deterministic bytes for
// identical values, which the byte-identical-rerun contract depends on.
inline std::string csv_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string csv_opt(const std::optional<double>& v) {
    return v ? csv_double(*v) : std::string();
}

}  // namespace detail

inline std::string to_csv_row(const MetricsRecord& r) {
    using detail::csv_double;
    using detail::csv_opt;
    std::string row;
    row += std::to_string(r.iteration);
    row += ',';
    row += std::to_string(r.epoch);
    row += ',';
    row += csv_double(r.loss);
    row += ',';
    row += r.metric_name;
    row += ',';
    row += csv_double(r.metric_value);
    row += ',';
    row += csv_double(r.wall_ms);
    row += ',';
    row += csv_opt(r.sparsity_global);
    row += ',';
    row += csv_opt(r.kappa_raw);
    row += ',';
    row += csv_opt(r.kappa_jacobi);
    row += ',';
    row += csv_opt(r.kappa_equilibrated);
    return row;
}

class MetricsWriter {
public:
    explicit MetricsWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("metrics: cannot write '" + path + "'");
        out_ << kMetricsHeader << "\n";
    }

    void append(const MetricsRecord& r) {
        out_ << to_csv_row(r) << "\n";
        if (!out_) throw ConfigError("metrics: write failure");
    }

    void flush() { out_.flush(); }

private:
    std::ofstream out_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline std::optional<double> opt_cell(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

}  // namespace detail

inline std::vector<MetricsRecord> parse_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("metrics: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("metrics: empty file '" + path + "'");
    if (line.find("iteration,epoch,loss") != 0)
        throw ConfigError("metrics: unexpected header in '" + path + "'");
    std::vector<MetricsRecord> rows;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 10)
            throw ConfigError("metrics: row with " + std::to_string(cells.size()) +
                              " cells in '" + path + "'");
        MetricsRecord r;
        r.iteration = std::stoll(cells[0]);
        r.epoch = std::stoll(cells[1]);
        r.loss = std::stod(cells[2]);
        r.metric_name = cells[3];
        r.metric_value = std::stod(cells[4]);
        r.wall_ms = std::stod(cells[5]);
        r.sparsity_global = detail::opt_cell(cells[6]);
        r.kappa_raw = detail::opt_cell(cells[7]);
        r.kappa_jacobi = detail::opt_cell(cells[8]);
        r.kappa_equilibrated = detail::opt_cell(cells[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace nfp
