#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "featgate/booster.hpp"
#include "featgate/config.hpp"
#include "featgate/gaopt.hpp"
#include "featgate/ingest.hpp"
#include "featgate/metrics.hpp"

namespace featgate {

enum class Arm { Baseline, Augmented };

std::string_view to_string(Arm arm);
std::optional<Arm> parse_arm(std::string_view text);

struct RunRecord {
  Arm arm = Arm::Baseline;
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> pool;
  OptimResult optim;
  MetricSet test_metrics;
  std::vector<PfiEntry> pfi;
  // Champion's test-row trace for the prediction overlay.
  std::vector<std::string> test_dates;
  std::vector<double> test_actual;
  std::vector<double> test_predicted;
  std::string config_fingerprint;
};

struct MetricComparison {
  std::string metric;
  double mean_baseline = 0.0;
  double mean_augmented = 0.0;
  // 100 * (augmented - baseline) / |baseline|; NaN when baseline mean is 0.
  double percent_change = 0.0;
  double overlap = 0.0;
  // U is reported for the baseline sample.
  UTestResult u_test;
};

struct FeatureFrequency {
  std::string name;
  std::size_t count = 0;
  double mean_r2_drop = 0.0;
};

struct ComparisonReport {
  std::size_t runs_per_arm = 0;
  std::vector<MetricComparison> metrics;  // r2, mae, rmse
  std::vector<FeatureFrequency> feature_frequency;
  // Run index of the highest-R^2 champion per arm.
  std::size_t headline_baseline = 0;
  std::size_t headline_augmented = 0;
  nlohmann::json config_snapshot;
};

std::string run_file_name(Arm arm, std::size_t run_index);
std::string model_file_name(Arm arm, std::size_t run_index);
std::string config_fingerprint(const nlohmann::json& snapshot);

std::vector<std::string> pool_for(Arm arm, const AlignedDataset& d);

// Builds the dataset described by cfg.data.
AlignedDataset load_experiment_data(const ExperimentConfig& cfg);

struct ChampionData {
  FeatureMatrix test_x;
  std::vector<double> test_y;
};

// Rebuilds the champion's test rows from its genome.
ChampionData champion_test_rows(const RunRecord& record, const AlignedDataset& d,
                                const ExperimentConfig& cfg);

// PFI of a champion over its test rows, seeded from the run seed only.
std::vector<PfiEntry> champion_pfi(const RunRecord& record, const BoostedModel& model,
                                   const AlignedDataset& d, const ExperimentConfig& cfg);

// One GA run plus champion refit, test metrics and PFI.
RunRecord execute_run(const AlignedDataset& d, const ExperimentConfig& cfg, Arm arm,
                      std::size_t run_index, BoostedModel* champion_model = nullptr);

ComparisonReport compare_arms(std::span<const RunRecord> records, std::size_t hist_bins = 10,
                              const nlohmann::json& config_snapshot = nlohmann::json::object());

using ProgressFn = std::function<void(const RunRecord& record, bool resumed)>;

struct ExperimentOutput {
  std::vector<RunRecord> records;
  std::optional<ComparisonReport> report;  // only when both arms ran
};

// Runs every (arm, run) pair, persisting runs/<arm>_<idx>.json and
// models/<arm>_<idx>.json under out_dir as each finishes. Existing run files
// with a matching config fingerprint are reused. With both arms the report
// and plots are emitted into out_dir too.
ExperimentOutput run_experiment(const AlignedDataset& d, const ExperimentConfig& cfg,
                                std::span<const Arm> arms, const std::filesystem::path& out_dir,
                                const ProgressFn& progress = {});

nlohmann::json run_to_json(const RunRecord& r);
RunRecord run_from_json(const nlohmann::json& doc);
nlohmann::json report_to_json(const ComparisonReport& r);
std::string dump_json(const nlohmann::json& doc);

// Model document with the context needed to rebuild its feature rows.
nlohmann::json champion_model_json(const BoostedModel& model, const RunRecord& record,
                                   const ExperimentConfig& cfg);

// Reads runs/*.json from a results directory, ordered by arm then index.
std::vector<RunRecord> load_runs(const std::filesystem::path& results_dir);

// report.json, runs/, and SVG plots.
void emit_report(const ComparisonReport& report, std::span<const RunRecord> records,
                 const std::filesystem::path& out_dir);

// Rebuilds the report from a results directory written by run_experiment.
ComparisonReport report_from_results(const std::filesystem::path& results_dir,
                                     const std::filesystem::path& out_dir);

}  // namespace featgate
