#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "featgate/featgate.h"

namespace {

int report_failure(fg_status status) {
  std::cerr << "featgate: " << fg_last_error() << "\n";
  return static_cast<int>(status);
}

struct ConfigHandle {
  fg_config* ptr = nullptr;
  ~ConfigHandle() { fg_config_free(ptr); }
};

struct DatasetHandle {
  fg_dataset* ptr = nullptr;
  ~DatasetHandle() { fg_dataset_free(ptr); }
};

fg_status open_config(const std::string& path, ConfigHandle& cfg) {
  return path.empty() ? fg_config_default(&cfg.ptr) : fg_config_load(path.c_str(), &cfg.ptr);
}

void print_progress(const char* arm, size_t run_index, double test_r2, int resumed, void*) {
  std::fprintf(stderr, "%s run %zu: test R2 = %.6f%s\n", arm, run_index, test_r2,
               resumed ? " (resumed)" : "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Genetic feature-window search for paired forecasting experiments"};
  app.set_version_flag("--version", std::string(fg_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string prices_path;
  std::string covid_path;
  std::string out_path;
  auto* ingest = app.add_subcommand("ingest", "Align prices and indicators into a dataset CSV");
  ingest->add_option("--prices", prices_path, "Daily price CSV (Date, Close)")->required();
  ingest->add_option("--covid", covid_path, "Indicator CSV (date, location, columns...)");
  ingest->add_option("--config", config_path, "Experiment config JSON");
  ingest->add_option("--out", out_path, "Output dataset CSV")->required();

  std::string data_path;
  std::string arm = "both";
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> holdout;
  std::optional<std::size_t> generations;
  std::optional<std::size_t> threads;
  auto* run = app.add_subcommand("run", "Run the GA experiment for one or both arms");
  run->add_option("--config", config_path, "Experiment config JSON");
  run->add_option("--data", data_path, "Aligned dataset CSV (skips ingest)");
  run->add_option("--arm", arm, "Arms to run")->check(CLI::IsMember({"both", "baseline", "augmented"}));
  run->add_option("--runs", runs, "Runs per arm");
  run->add_option("--seed", seed, "Base seed; run r uses seed + r");
  run->add_option("--holdout", holdout, "Training rows reserved for GA selection");
  run->add_option("--generations", generations, "GA generations");
  run->add_option("--threads", threads, "Concurrent runs (0 = all cores)");
  run->add_option("--out", out_path, "Results directory")->required();

  std::string in_path;
  auto* report = app.add_subcommand("report", "Rebuild the comparison report from run files");
  report->add_option("--in", in_path, "Results directory")->required();
  report->add_option("--out", out_path, "Report directory")->required();

  std::string model_path;
  std::string rows = "test";
  std::size_t repeats = 0;
  std::optional<std::uint64_t> pfi_seed;
  auto* pfi = app.add_subcommand("pfi", "Permutation importance of a saved champion");
  pfi->add_option("--model", model_path, "Champion model JSON")->required();
  pfi->add_option("--data", data_path, "Aligned dataset CSV")->required();
  pfi->add_option("--rows", rows, "Rows to score")->check(CLI::IsMember({"test", "all"}));
  pfi->add_option("--repeats", repeats, "Shuffles per feature (default: recorded value)");
  pfi->add_option("--seed", pfi_seed, "Shuffle seed (default: recorded value)");

  std::size_t synth_rows = 0;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "Write a dataset with an injected indicator signal");
  synth->add_option("--rows", synth_rows, "Aligned rows");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--out", out_path, "Output dataset CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : FG_ERR_CONFIG;
  }

  fg_status st = FG_OK;
  if (*ingest) {
    ConfigHandle cfg;
    DatasetHandle ds;
    if ((st = open_config(config_path, cfg)) != FG_OK) return report_failure(st);
    if ((st = fg_config_set_aligned(cfg.ptr, "")) != FG_OK) return report_failure(st);
    if ((st = fg_config_set_prices(cfg.ptr, prices_path.c_str())) != FG_OK) return report_failure(st);
    if ((st = fg_config_set_indicators(cfg.ptr, covid_path.c_str())) != FG_OK) return report_failure(st);
    if ((st = fg_dataset_ingest(cfg.ptr, &ds.ptr)) != FG_OK) return report_failure(st);
    if ((st = fg_dataset_save(ds.ptr, out_path.c_str())) != FG_OK) return report_failure(st);
    std::printf("wrote %zu rows x %zu series to %s\n", fg_dataset_rows(ds.ptr),
                fg_dataset_series_count(ds.ptr), out_path.c_str());
    return 0;
  }

  if (*run) {
    ConfigHandle cfg;
    DatasetHandle ds;
    if ((st = open_config(config_path, cfg)) != FG_OK) return report_failure(st);
    if (runs && (st = fg_config_set_runs(cfg.ptr, *runs)) != FG_OK) return report_failure(st);
    if (seed && (st = fg_config_set_seed(cfg.ptr, *seed)) != FG_OK) return report_failure(st);
    if (holdout && (st = fg_config_set_holdout(cfg.ptr, *holdout)) != FG_OK) return report_failure(st);
    if (generations && (st = fg_config_set_generations(cfg.ptr, *generations)) != FG_OK) {
      return report_failure(st);
    }
    if (threads && (st = fg_config_set_threads(cfg.ptr, *threads)) != FG_OK) return report_failure(st);
    st = data_path.empty() ? fg_dataset_ingest(cfg.ptr, &ds.ptr) : fg_dataset_load(data_path.c_str(), &ds.ptr);
    if (st != FG_OK) return report_failure(st);
    const int arms = arm == "both" ? FG_ARM_BOTH : arm == "baseline" ? FG_ARM_BASELINE : FG_ARM_AUGMENTED;
    st = fg_experiment_run(ds.ptr, cfg.ptr, arms, out_path.c_str(), print_progress, nullptr);
    if (st != FG_OK) return report_failure(st);
    std::printf("results in %s\n", out_path.c_str());
    return 0;
  }

  if (*report) {
    char* summary = nullptr;
    if ((st = fg_report_build(in_path.c_str(), out_path.c_str(), &summary)) != FG_OK) {
      return report_failure(st);
    }
    std::fputs(summary, stdout);
    fg_string_free(summary);
    return 0;
  }

  if (*pfi) {
    fg_model* model = nullptr;
    DatasetHandle ds;
    if ((st = fg_model_load(model_path.c_str(), &model)) != FG_OK) return report_failure(st);
    if ((st = fg_dataset_load(data_path.c_str(), &ds.ptr)) != FG_OK) {
      fg_model_free(model);
      return report_failure(st);
    }
    fg_pfi_result* res = nullptr;
    st = fg_pfi_compute(model, ds.ptr, rows == "all" ? FG_ROWS_ALL : FG_ROWS_TEST, repeats,
                        pfi_seed ? &*pfi_seed : nullptr, &res);
    fg_model_free(model);
    if (st != FG_OK) return report_failure(st);
    char* json = nullptr;
    st = fg_pfi_to_json(res, &json);
    fg_pfi_free(res);
    if (st != FG_OK) return report_failure(st);
    std::fputs(json, stdout);
    fg_string_free(json);
    return 0;
  }

  if (*synth) {
    DatasetHandle ds;
    if ((st = fg_dataset_synthetic(synth_rows, synth_seed, &ds.ptr)) != FG_OK) return report_failure(st);
    if ((st = fg_dataset_save(ds.ptr, out_path.c_str())) != FG_OK) return report_failure(st);
    std::printf("wrote %zu rows x %zu series to %s\n", fg_dataset_rows(ds.ptr),
                fg_dataset_series_count(ds.ptr), out_path.c_str());
    return 0;
  }
  return 0;
}
