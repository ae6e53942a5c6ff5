#include "featgate/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>

#include "featgate/csv.hpp"
#include "featgate/error.hpp"
#include "featgate/parallel.hpp"
#include "featgate/rng.hpp"
#include "featgate/svg.hpp"

namespace featgate {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kReportFormatVersion = 1;
constexpr std::array<std::string_view, 3> kMetricNames = {"r2", "mae", "rmse"};

json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_from(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

json numbers(std::span<const double> values) {
  json out = json::array();
  for (double v : values) out.push_back(number_or_null(v));
  return out;
}

std::vector<double> numbers_from(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number_from(v));
  return out;
}

double metric_of(const MetricSet& m, std::string_view name) {
  if (name == "r2") return m.r2;
  if (name == "mae") return m.mae;
  return m.rmse;
}

std::uint64_t pfi_seed(std::uint64_t run_seed) { return derive_seed({run_seed, 0x706669ULL}); }

SplitIndices experiment_split(const AlignedDataset& d, const ExperimentConfig& cfg) {
  const auto lookback = static_cast<std::size_t>(cfg.lookback);
  const std::size_t usable = d.rows() > lookback ? d.rows() - lookback : 0;
  return chronological_split(usable, cfg.train, cfg.test);
}

std::vector<const RunRecord*> arm_records(std::span<const RunRecord> records, Arm arm) {
  std::vector<const RunRecord*> out;
  for (const auto& r : records) {
    if (r.arm == arm) out.push_back(&r);
  }
  std::sort(out.begin(), out.end(),
            [](const RunRecord* a, const RunRecord* b) { return a->run_index < b->run_index; });
  return out;
}

std::size_t headline_index(const std::vector<const RunRecord*>& runs) {
  std::size_t best = 0;
  double best_r2 = -std::numeric_limits<double>::infinity();
  for (const RunRecord* r : runs) {
    if (std::isfinite(r->test_metrics.r2) && r->test_metrics.r2 > best_r2) {
      best_r2 = r->test_metrics.r2;
      best = r->run_index;
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(Arm arm) { return arm == Arm::Baseline ? "baseline" : "augmented"; }

std::optional<Arm> parse_arm(std::string_view text) {
  if (text == "baseline" || text == "Baseline") return Arm::Baseline;
  if (text == "augmented" || text == "Augmented") return Arm::Augmented;
  return std::nullopt;
}

std::string run_file_name(Arm arm, std::size_t run_index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.json", std::string(to_string(arm)).c_str(), run_index);
  return buf;
}

std::string model_file_name(Arm arm, std::size_t run_index) { return run_file_name(arm, run_index); }

std::string config_fingerprint(const json& snapshot) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : snapshot.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> pool_for(Arm arm, const AlignedDataset& d) {
  return arm == Arm::Baseline ? baseline_pool() : augmented_pool(d);
}

AlignedDataset load_experiment_data(const ExperimentConfig& cfg) {
  if (!cfg.data.aligned.empty()) {
    AlignedDataset d = load_dataset(cfg.data.aligned);
    if (d.horizon != cfg.data.horizon) {
      fail(ErrorCode::InvalidConfig, "aligned dataset horizon " + std::to_string(d.horizon) +
                                         " differs from config horizon " +
                                         std::to_string(cfg.data.horizon));
    }
    return d;
  }
  if (cfg.data.prices.empty()) fail(ErrorCode::InvalidConfig, "data.prices or data.aligned required");
  const PriceSeries prices = load_prices(cfg.data.prices, cfg.data.date_col, cfg.data.close_col);
  const NamedSeries returns = log_returns(prices);
  const auto calendar = calendar_features(returns.dates);
  if (cfg.data.indicators.empty()) {
    return align(returns, calendar, nullptr, cfg.data.horizon, cfg.data.gap_policy);
  }
  const IndicatorTable ind = load_indicators(cfg.data.indicators, cfg.data.indicator);
  return align(returns, calendar, &ind, cfg.data.horizon, cfg.data.gap_policy);
}

ChampionData champion_test_rows(const RunRecord& record, const AlignedDataset& d,
                                const ExperimentConfig& cfg) {
  const SplitIndices split = experiment_split(d, cfg);
  const DecodedGenome decoded = decode(record.optim.best_genome, record.pool);
  const FeatureMatrix x = build_matrix(d, decoded.enabled(), cfg.lookback);
  const auto y = matrix_targets(d, cfg.lookback);
  ChampionData out;
  out.test_x = x.slice_rows(split.train_end, split.train_end + split.test_len);
  out.test_y.assign(y.begin() + static_cast<std::ptrdiff_t>(split.train_end),
                    y.begin() + static_cast<std::ptrdiff_t>(split.train_end + split.test_len));
  return out;
}

std::vector<PfiEntry> champion_pfi(const RunRecord& record, const BoostedModel& model,
                                   const AlignedDataset& d, const ExperimentConfig& cfg) {
  const ChampionData rows = champion_test_rows(record, d, cfg);
  PfiOptions options;
  options.repeats = cfg.pfi_repeats;
  options.seed = pfi_seed(record.seed);
  return permutation_importance(model, rows.test_x, rows.test_y, options);
}

RunRecord execute_run(const AlignedDataset& d, const ExperimentConfig& cfg, Arm arm,
                      std::size_t run_index, BoostedModel* champion_model) {
  RunRecord record;
  record.arm = arm;
  record.run_index = run_index;
  record.seed = cfg.seed + run_index;
  record.pool = pool_for(arm, d);
  record.config_fingerprint = config_fingerprint(config_snapshot(cfg));

  const GAConfig ga = cfg.ga_for_run(record.seed);
  const SplitIndices split = experiment_split(d, cfg);
  record.optim = run_ga(d, split, ga, record.pool);

  GenomeFit champion = fit_genome(record.optim.best_genome, d, split, record.pool, ga,
                                  record.optim.best_eval_seed, ScoreRows::Test);
  record.test_metrics = champion.outcome.metrics;
  record.test_actual = champion.scored_y;
  record.test_predicted = champion.predictions;
  const std::size_t first = static_cast<std::size_t>(cfg.lookback) + split.train_end;
  for (std::size_t i = 0; i < split.test_len; ++i) record.test_dates.push_back(format_date(d.dates[first + i]));
  if (!champion.outcome.degenerate) record.pfi = champion_pfi(record, champion.model, d, cfg);
  if (champion_model) *champion_model = std::move(champion.model);
  return record;
}

ComparisonReport compare_arms(std::span<const RunRecord> records, std::size_t hist_bins,
                              const json& snapshot) {
  const auto base = arm_records(records, Arm::Baseline);
  const auto aug = arm_records(records, Arm::Augmented);
  if (base.empty() || base.size() != aug.size()) {
    fail(ErrorCode::UnbalancedArms, std::to_string(base.size()) + " baseline vs " +
                                        std::to_string(aug.size()) + " augmented runs");
  }
  ComparisonReport report;
  report.runs_per_arm = base.size();
  report.config_snapshot = snapshot;

  for (std::string_view name : kMetricNames) {
    std::vector<double> a;
    std::vector<double> b;
    for (const RunRecord* r : base) a.push_back(metric_of(r->test_metrics, name));
    for (const RunRecord* r : aug) b.push_back(metric_of(r->test_metrics, name));
    MetricComparison mc;
    mc.metric = std::string(name);
    for (double v : a) mc.mean_baseline += v;
    for (double v : b) mc.mean_augmented += v;
    mc.mean_baseline /= static_cast<double>(a.size());
    mc.mean_augmented /= static_cast<double>(b.size());
    mc.percent_change = mc.mean_baseline != 0.0
                            ? 100.0 * (mc.mean_augmented - mc.mean_baseline) / std::abs(mc.mean_baseline)
                            : std::numeric_limits<double>::quiet_NaN();
    mc.overlap = histogram_overlap(a, b, hist_bins);
    mc.u_test = mann_whitney_u(a, b);
    report.metrics.push_back(mc);
  }

  // Names count once per champion; a name's drop sums its columns.
  struct Acc {
    std::size_t count = 0;
    double drop = 0.0;
  };
  std::map<std::string, Acc> acc;
  for (const RunRecord* r : aug) {
    const DecodedGenome decoded = decode(r->optim.best_genome, r->pool);
    std::map<std::string, double> drops;
    std::size_t column = 0;
    std::map<std::size_t, double> drop_by_column;
    for (const auto& e : r->pfi) drop_by_column[e.column] = e.r2_drop;
    for (const auto& spec : decoded.enabled()) {
      double& d = drops[spec.feature_name()];
      for (std::size_t k = 0; k < spec.column_names().size(); ++k, ++column) {
        const auto it = drop_by_column.find(column);
        if (it != drop_by_column.end()) d += it->second;
      }
    }
    for (const auto& [name, drop] : drops) {
      ++acc[name].count;
      acc[name].drop += drop;
    }
  }
  for (const auto& [name, a] : acc) {
    report.feature_frequency.push_back({name, a.count, a.drop / static_cast<double>(a.count)});
  }
  std::stable_sort(report.feature_frequency.begin(), report.feature_frequency.end(),
                   [](const FeatureFrequency& x, const FeatureFrequency& y) {
                     if (x.count != y.count) return x.count > y.count;
                     return x.mean_r2_drop > y.mean_r2_drop;
                   });
  report.headline_baseline = headline_index(base);
  report.headline_augmented = headline_index(aug);
  return report;
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

json run_to_json(const RunRecord& r) {
  json pfi = json::array();
  for (const auto& e : r.pfi) {
    pfi.push_back({{"feature", e.feature},
                   {"column", e.column},
                   {"r2_drop", number_or_null(e.r2_drop)},
                   {"repeats", e.repeats}});
  }
  return {
      {"arm", std::string(to_string(r.arm))},
      {"run_index", r.run_index},
      {"seed", r.seed},
      {"config_fingerprint", r.config_fingerprint},
      {"pool", r.pool},
      {"optim", optim_to_json(r.optim, r.pool)},
      {"test_metrics", metrics_to_json(r.test_metrics)},
      {"pfi", pfi},
      {"test",
       {{"dates", r.test_dates},
        {"actual", numbers(r.test_actual)},
        {"predicted", numbers(r.test_predicted)}}},
      {"model_file", "models/" + model_file_name(r.arm, r.run_index)},
  };
}

RunRecord run_from_json(const json& doc) {
  RunRecord r;
  try {
    const auto arm = parse_arm(doc.at("arm").get<std::string>());
    if (!arm) fail(ErrorCode::InvalidArgument, "unknown arm");
    r.arm = *arm;
    r.run_index = doc.at("run_index").get<std::size_t>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.config_fingerprint = doc.at("config_fingerprint").get<std::string>();
    r.pool = doc.at("pool").get<std::vector<std::string>>();
    r.optim = optim_from_json(doc.at("optim"));
    r.test_metrics = metrics_from_json(doc.at("test_metrics"));
    for (const auto& e : doc.at("pfi")) {
      r.pfi.push_back({e.at("feature").get<std::string>(), e.at("column").get<std::size_t>(),
                       number_from(e.at("r2_drop")), e.at("repeats").get<std::size_t>()});
    }
    const auto& t = doc.at("test");
    r.test_dates = t.at("dates").get<std::vector<std::string>>();
    r.test_actual = numbers_from(t.at("actual"));
    r.test_predicted = numbers_from(t.at("predicted"));
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("run record: ") + e.what());
  }
  return r;
}

json report_to_json(const ComparisonReport& r) {
  json metrics = json::object();
  for (const auto& m : r.metrics) {
    metrics[m.metric] = {
        {"mean_baseline", number_or_null(m.mean_baseline)},
        {"mean_augmented", number_or_null(m.mean_augmented)},
        {"percent_change", number_or_null(m.percent_change)},
        {"overlap", number_or_null(m.overlap)},
        {"u_test",
         {{"u_statistic", m.u_test.u_statistic},
          {"p_value", number_or_null(m.u_test.p_value)},
          {"n1", m.u_test.n1},
          {"n2", m.u_test.n2}}},
    };
  }
  json freq = json::array();
  for (const auto& f : r.feature_frequency) {
    freq.push_back({{"name", f.name}, {"count", f.count}, {"mean_r2_drop", number_or_null(f.mean_r2_drop)}});
  }
  return {
      {"format", "featgate.report"},
      {"version", kReportFormatVersion},
      {"runs_per_arm", r.runs_per_arm},
      {"metrics", metrics},
      {"feature_frequency", freq},
      {"headline_runs", {{"baseline", r.headline_baseline}, {"augmented", r.headline_augmented}}},
      {"config", r.config_snapshot},
  };
}

json champion_model_json(const BoostedModel& model, const RunRecord& record,
                         const ExperimentConfig& cfg) {
  json doc = model_to_json(model);
  json specs = json::array();
  for (const auto& s : decode(record.optim.best_genome, record.pool).enabled()) {
    specs.push_back(s.compact());
  }
  doc["context"] = {
      {"arm", std::string(to_string(record.arm))},
      {"run_index", record.run_index},
      {"feature_specs", specs},
      {"lookback", cfg.lookback},
      {"horizon", cfg.data.horizon},
      {"train_end", cfg.train},
      {"test_len", cfg.test},
      {"seed", record.seed},
      {"pfi_seed", pfi_seed(record.seed)},
      {"pfi_repeats", cfg.pfi_repeats},
  };
  return doc;
}

std::vector<RunRecord> load_runs(const fs::path& results_dir) {
  const fs::path runs_dir = results_dir / "runs";
  std::error_code ec;
  if (!fs::is_directory(runs_dir, ec)) fail(ErrorCode::IoError, "no runs/ directory in " + results_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> out;
  for (const auto& f : files) {
    try {
      out.push_back(run_from_json(json::parse(read_text_file(f))));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::IoError, f.string() + ": " + e.what());
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const RunRecord& a, const RunRecord& b) {
    if (a.arm != b.arm) return a.arm < b.arm;
    return a.run_index < b.run_index;
  });
  return out;
}

void emit_report(const ComparisonReport& report, std::span<const RunRecord> records,
                 const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir / "runs", ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + out_dir.string());
  write_text_file(out_dir / "report.json", dump_json(report_to_json(report)));
  for (const auto& r : records) {
    write_text_file(out_dir / "runs" / run_file_name(r.arm, r.run_index), dump_json(run_to_json(r)));
  }

  const auto base = arm_records(records, Arm::Baseline);
  const auto aug = arm_records(records, Arm::Augmented);
  for (std::string_view name : kMetricNames) {
    svg::Series a{"Baseline", {}};
    svg::Series b{"Augmented", {}};
    for (const RunRecord* r : base) a.values.push_back(metric_of(r->test_metrics, name));
    for (const RunRecord* r : aug) b.values.push_back(metric_of(r->test_metrics, name));
    const std::size_t bins = report.config_snapshot.contains("experiment")
                                 ? report.config_snapshot["experiment"].value("hist_bins", std::size_t{10})
                                 : std::size_t{10};
    write_text_file(out_dir / ("hist_" + std::string(name) + ".svg"),
                    svg::histogram(std::string(name) + " distribution over runs", a, b, bins));
  }
  const auto find = [&](const std::vector<const RunRecord*>& runs, std::size_t idx) -> const RunRecord* {
    for (const RunRecord* r : runs) {
      if (r->run_index == idx) return r;
    }
    return runs.empty() ? nullptr : runs.front();
  };
  const std::pair<Arm, const RunRecord*> headlines[] = {
      {Arm::Baseline, find(base, report.headline_baseline)},
      {Arm::Augmented, find(aug, report.headline_augmented)},
  };
  for (const auto& [arm, r] : headlines) {
    if (!r) continue;
    char title[128];
    std::snprintf(title, sizeof title, "%s champion (run %zu), test R2 = %.4f",
                  arm == Arm::Baseline ? "Baseline" : "Augmented", r->run_index, r->test_metrics.r2);
    write_text_file(out_dir / ("overlay_" + std::string(to_string(arm)) + ".svg"),
                    svg::overlay(title, r->test_actual, r->test_predicted));
    write_text_file(out_dir / ("pfi_" + std::string(to_string(arm)) + ".svg"),
                    svg::importance_bars(std::string("Permutation importance, ") + title, r->pfi));
  }
}

ExperimentOutput run_experiment(const AlignedDataset& d, const ExperimentConfig& cfg,
                                std::span<const Arm> arms, const fs::path& out_dir,
                                const ProgressFn& progress) {
  cfg.validate();
  experiment_split(d, cfg);
  const json snapshot = config_snapshot(cfg);
  const std::string fingerprint = config_fingerprint(snapshot);
  std::error_code ec;
  fs::create_directories(out_dir / "runs", ec);
  fs::create_directories(out_dir / "models", ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + out_dir.string());
  write_text_file(out_dir / "experiment.json", dump_json(snapshot));

  struct Task {
    Arm arm;
    std::size_t run;
  };
  std::vector<Task> tasks;
  for (Arm arm : arms) {
    for (std::size_t r = 0; r < cfg.runs; ++r) tasks.push_back({arm, r});
  }
  std::vector<RunRecord> records(tasks.size());
  std::mutex progress_mutex;
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t k) {
    const Task& task = tasks[k];
    const fs::path run_path = out_dir / "runs" / run_file_name(task.arm, task.run);
    bool resumed = false;
    std::error_code exists_ec;
    if (fs::exists(run_path, exists_ec)) {
      try {
        RunRecord prior = run_from_json(json::parse(read_text_file(run_path)));
        if (prior.arm == task.arm && prior.run_index == task.run &&
            prior.seed == cfg.seed + task.run && prior.config_fingerprint == fingerprint) {
          records[k] = std::move(prior);
          resumed = true;
        }
      } catch (const std::exception&) {
        // Unreadable or partial file: rerun.
      }
    }
    if (!resumed) {
      BoostedModel model;
      records[k] = execute_run(d, cfg, task.arm, task.run, &model);
      write_text_file(out_dir / "models" / model_file_name(task.arm, task.run),
                      dump_json(champion_model_json(model, records[k], cfg)));
      write_text_file(run_path, dump_json(run_to_json(records[k])));
    }
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(records[k], resumed);
    }
  });

  ExperimentOutput out;
  out.records = std::move(records);
  const bool both = std::find(arms.begin(), arms.end(), Arm::Baseline) != arms.end() &&
                    std::find(arms.begin(), arms.end(), Arm::Augmented) != arms.end();
  if (both) {
    out.report = compare_arms(out.records, cfg.hist_bins, snapshot);
    emit_report(*out.report, out.records, out_dir);
  }
  return out;
}

ComparisonReport report_from_results(const fs::path& results_dir, const fs::path& out_dir) {
  json snapshot;
  try {
    snapshot = json::parse(read_text_file(results_dir / "experiment.json"));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::IoError, std::string("experiment.json: ") + e.what());
  }
  const auto records = load_runs(results_dir);
  const std::size_t bins = snapshot.contains("experiment")
                               ? snapshot["experiment"].value("hist_bins", std::size_t{10})
                               : std::size_t{10};
  ComparisonReport report = compare_arms(records, bins, snapshot);
  emit_report(report, records, out_dir);

  std::error_code ec;
  if (!fs::equivalent(results_dir, out_dir, ec)) {
    write_text_file(out_dir / "experiment.json", dump_json(snapshot));
    const fs::path models = results_dir / "models";
    if (fs::is_directory(models, ec)) {
      fs::create_directories(out_dir / "models", ec);
      for (const auto& entry : fs::directory_iterator(models)) {
        if (!entry.is_regular_file()) continue;
        fs::copy_file(entry.path(), out_dir / "models" / entry.path().filename(),
                      fs::copy_options::overwrite_existing, ec);
        if (ec) fail(ErrorCode::IoError, "cannot copy " + entry.path().string());
      }
    }
  }
  return report;
}

}  // namespace featgate
