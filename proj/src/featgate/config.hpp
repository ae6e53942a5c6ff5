#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "featgate/gaopt.hpp"
#include "featgate/ingest.hpp"

namespace featgate {

struct DataConfig {
  // Paths are resolved against the config file's directory.
  std::string prices;
  std::string indicators;
  // Pre-aligned dataset CSV; when set, prices/indicators are not read.
  std::string aligned;
  std::string date_col = "Date";
  std::string close_col = "Close";
  IndicatorOptions indicator;
  GapPolicy gap_policy = GapPolicy::ForwardFillThenZero;
  int horizon = 7;
};

struct ExperimentConfig {
  DataConfig data;
  int lookback = kDefaultLookback;
  std::size_t train = 358;
  std::size_t test = 200;
  GAConfig ga;
  std::size_t runs = 31;
  std::uint64_t seed = 42;
  // Concurrent runs. 0 = hardware threads. Never affects results.
  std::size_t threads = 0;
  std::size_t pfi_repeats = 10;
  std::size_t hist_bins = 10;

  void validate() const;
  // GA settings with the experiment-level lookback applied.
  GAConfig ga_for_run(std::uint64_t run_seed) const;
};

// OWID-style column names: cases, deaths, per-million forms, hospital and ICU
// load, tests, vaccinations, boosters and the stringency index.
std::vector<std::string> default_indicator_columns();

ExperimentConfig default_config();
ExperimentConfig config_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
// Result-affecting settings only (no thread counts), suitable for snapshots.
nlohmann::json config_snapshot(const ExperimentConfig& cfg);

}  // namespace featgate
