#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ballistic {

// "experiment v1" document:
//   {"format": "experiment v1", "scenario": <name>, "seed": <u64>,
//    "trials": <n>, "threads": <n, optional>, "output": <dir, optional>,
//    "params": {...}}
// Missing params take scenario defaults; unknown keys are rejected.
struct ExperimentConfig {
    std::string scenario;
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 1;
    std::size_t trials = 1;
    int threads = 0;  // 0: OpenMP default
    std::string output;

    static ExperimentConfig parse(std::string_view text);
    static ExperimentConfig load(const std::string& path);
    // Fills defaults and checks every parameter; throws SpecError.
    void validate();
    // Sorted-key JSON of everything that determines results (threads and
    // output excluded).
    std::string canonical() const;
    // First 16 hex digits of SHA-256(canonical()).
    std::string hash() const;
    nlohmann::json to_json() const;
};

struct ResultRecord {
    std::string config_hash;
    std::string scenario;
    std::uint64_t seed = 0;
    std::size_t trial = 0;
    std::vector<std::pair<std::string, double>> metrics;  // keys fixed per scenario
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
    std::vector<double> values(const std::string& name) const;
    // Numbers printed with 10 significant digits.
    std::string csv() const;
};

struct RunOutput {
    std::vector<ResultRecord> records;
    Table summary;
    double wall_seconds = 0;
};

std::vector<std::string> scenario_names();
// Default parameters of a scenario.
nlohmann::json scenario_defaults(const std::string& scenario);

RunOutput run_experiment(ExperimentConfig config);

std::string records_jsonl(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> parse_records_jsonl(std::string_view text);
// summary.csv carries a trailing config_hash column.
std::string summary_csv(const Table& summary, const std::string& config_hash);

// Writes config.json, results.jsonl and summary.csv (deterministic) and
// timing.json (wall clock) into `dir`.
void write_run(const ExperimentConfig& config, const RunOutput& out, const std::string& dir);

// Summary recomputed from stored records.
Table summarize_records(const ExperimentConfig& config, const std::vector<ResultRecord>& records);

std::vector<std::string> figure_ids();

struct FigureOutput {
    Table data;
    std::string svg;
};

// Reads results.jsonl (and config.json next to it).
FigureOutput emit_figure(const std::string& results_path, const std::string& figure_id);
// Writes <id>.csv and <id>.svg into `dir`.
void write_figure(const FigureOutput& fig, const std::string& figure_id, const std::string& dir);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

// Self-contained SVG with one polyline per series.
std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

// x where the sampled curve y(x) first crosses `level`, by linear
// interpolation between neighbouring points sorted by x; NaN if it never does.
double level_crossing(std::vector<double> x, std::vector<double> y, double level);

}  // namespace ballistic
