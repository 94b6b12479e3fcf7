#pragma once

#include "efcml/active.hpp"
#include "efcml/baselines.hpp"
#include "efcml/ingest.hpp"
#include "efcml/metrics.hpp"
#include "efcml/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace efcml {

enum class AlMode { Off, Labels, Samples, Random };

struct GridSpec {
    std::vector<double> alphas{0, 0.01, 0.025, 0.05, 0.075, 0.1, 0.5, 1, 5, 10};
    std::vector<double> betas{0, 0.1, 0.5, 1, 5, 10, 50, 100};
    std::vector<double> vigilances{0.1,  0.15, 0.2,  0.25, 0.3,  0.35, 0.4,  0.45, 0.5,
                                   0.55, 0.6,  0.65, 0.7,  0.75, 0.8,  0.85, 0.9};
    int folds = 5;
};

struct RunSpec {
    std::filesystem::path data_path;
    std::filesystem::path labels_xml;  // ARFF label spec
    Index csv_labels = 0;              // >0: CSV input with this many labels
    bool csv_labels_at_end = true;
    bool csv_header = false;

    std::string method = "efcml";
    double split_fraction = 0.25;
    std::optional<GridSpec> grid;  // set: grid-search warm-up on the initial batch
    LearnConfig base;
    AlMode al_mode = AlMode::Off;
    double budget = 1.0;
    std::uint64_t seed = 42;
    std::filesystem::path out_dir;  // empty: no files written
};

struct TrendPoint {
    std::int64_t n = 0;
    double pa = 0.0;
    double ap = 0.0;
    std::int64_t rules = 0;
    double selected_fraction = 0.0;
    double cum_update_seconds = 0.0;
};

struct SelectionLogRow {
    std::int64_t sample_id = 0;
    std::string verdict;
    unsigned triggers = 0;
    std::vector<Index> labels;
    double spend_fraction = 0.0;
};

struct RunResult {
    std::vector<TrendPoint> trend;
    std::vector<SelectionLogRow> selection;
    LearnConfig config;  // resolved, post grid search
    MetricState final_metrics;
    double mean_update_seconds = 0.0;
    std::int64_t final_rules = 0;
    std::int64_t merge_events = 0;
    std::int64_t evolve_events = 0;
    nlohmann::json model_json;
};

/// k-fold cross-validation over the grid on the initial batch; returns the
/// config with the lowest 1 - PA error. Baseline methods search the
/// vigilance axis only.
LearnConfig grid_search(const Dataset& batch, const std::string& method, const GridSpec& grid,
                        int folds, const LearnConfig& base, std::uint64_t seed);

/// Interleaved test-then-train over the stream part of the dataset named in
/// the spec; one TrendPoint per stream sample.
RunResult run_interleaved(const RunSpec& spec);
RunResult run_interleaved(const RunSpec& spec, const Dataset& data);

void emit_trends(const std::vector<TrendPoint>& points, const std::filesystem::path& path);
void emit_selection_log(const std::vector<SelectionLogRow>& rows,
                        const std::filesystem::path& path);

/// Mean wall-clock seconds per stream-sample model update (selection +
/// update work; prediction, metrics and I/O excluded).
double time_updates(const RunSpec& spec, const Dataset& data);

Dataset load_dataset(const RunSpec& spec);

}  // namespace efcml
