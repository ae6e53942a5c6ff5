#include "featgate/config.hpp"

#include "featgate/csv.hpp"
#include "featgate/error.hpp"

namespace featgate {

namespace {

using nlohmann::json;

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string(key) + ": " + e.what());
  }
}

std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty() || base.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (base / p).lexically_normal().string();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(ErrorCode::InvalidConfig, "unknown key '" + key + "' in " + where);
  }
}

}  // namespace

std::vector<std::string> default_indicator_columns() {
  return {
      "total_cases",
      "new_cases",
      "new_cases_smoothed",
      "total_deaths",
      "new_deaths",
      "new_deaths_smoothed",
      "total_cases_per_million",
      "new_cases_per_million",
      "new_cases_smoothed_per_million",
      "total_deaths_per_million",
      "new_deaths_per_million",
      "new_deaths_smoothed_per_million",
      "reproduction_rate",
      "icu_patients",
      "icu_patients_per_million",
      "hosp_patients",
      "hosp_patients_per_million",
      "weekly_icu_admissions",
      "weekly_icu_admissions_per_million",
      "weekly_hosp_admissions",
      "weekly_hosp_admissions_per_million",
      "total_tests",
      "new_tests",
      "total_tests_per_thousand",
      "new_tests_per_thousand",
      "new_tests_smoothed",
      "new_tests_smoothed_per_thousand",
      "positive_rate",
      "tests_per_case",
      "total_vaccinations",
      "people_vaccinated",
      "people_fully_vaccinated",
      "total_boosters",
      "new_vaccinations",
      "new_vaccinations_smoothed",
      "total_vaccinations_per_hundred",
      "people_vaccinated_per_hundred",
      "people_fully_vaccinated_per_hundred",
      "total_boosters_per_hundred",
      "new_vaccinations_smoothed_per_million",
      "new_people_vaccinated_smoothed",
      "new_people_vaccinated_smoothed_per_hundred",
      "stringency_index",
      "excess_mortality",
      "excess_mortality_cumulative_per_million",
  };
}

void ExperimentConfig::validate() const {
  const auto bad = [](const std::string& what) { fail(ErrorCode::InvalidConfig, what); };
  if (data.horizon < 1) bad("data.horizon must be >= 1");
  if (train == 0 || test == 0) bad("split.train and split.test must be > 0");
  if (runs < 2) bad("experiment.runs must be >= 2");
  if (pfi_repeats < 1) bad("experiment.pfi_repeats must be >= 1");
  if (hist_bins < 2) bad("experiment.hist_bins must be >= 2");
  ga_for_run(seed).validate();
  if (ga.holdout >= train) bad("ga.holdout must be < split.train");
}

GAConfig ExperimentConfig::ga_for_run(std::uint64_t run_seed) const {
  GAConfig g = ga;
  g.lookback = lookback;
  g.seed = run_seed;
  g.threads = 1;
  return g;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.data.indicator.location = "World";
  cfg.data.indicator.columns = default_indicator_columns();
  return cfg;
}

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) fail(ErrorCode::InvalidConfig, "config must be a JSON object");
  reject_unknown(doc, {"data", "horizon", "lookback", "split", "ga", "experiment"}, "config");
  ExperimentConfig cfg = default_config();

  if (doc.contains("data")) {
    const json& d = doc.at("data");
    reject_unknown(d, {"prices", "indicators", "aligned", "date_col", "close_col",
                       "indicator_date_col", "location_col", "location", "indicator_columns",
                       "gap_policy"},
                   "data");
    read_if(d, "prices", cfg.data.prices);
    read_if(d, "indicators", cfg.data.indicators);
    read_if(d, "aligned", cfg.data.aligned);
    read_if(d, "date_col", cfg.data.date_col);
    read_if(d, "close_col", cfg.data.close_col);
    read_if(d, "indicator_date_col", cfg.data.indicator.date_col);
    read_if(d, "location_col", cfg.data.indicator.location_col);
    if (d.contains("location")) {
      if (d.at("location").is_null()) {
        cfg.data.indicator.location.reset();
      } else {
        std::string loc;
        read_if(d, "location", loc);
        cfg.data.indicator.location = loc;
      }
    }
    read_if(d, "indicator_columns", cfg.data.indicator.columns);
    if (d.contains("gap_policy")) {
      std::string text;
      read_if(d, "gap_policy", text);
      const auto policy = parse_gap_policy(text);
      if (!policy) fail(ErrorCode::InvalidConfig, "data.gap_policy '" + text + "'");
      cfg.data.gap_policy = *policy;
    }
    cfg.data.prices = resolve(cfg.data.prices, base_dir);
    cfg.data.indicators = resolve(cfg.data.indicators, base_dir);
    cfg.data.aligned = resolve(cfg.data.aligned, base_dir);
  }
  read_if(doc, "horizon", cfg.data.horizon);
  read_if(doc, "lookback", cfg.lookback);
  if (doc.contains("split")) {
    const json& s = doc.at("split");
    reject_unknown(s, {"train", "test"}, "split");
    read_if(s, "train", cfg.train);
    read_if(s, "test", cfg.test);
  }
  if (doc.contains("ga")) {
    const json& g = doc.at("ga");
    reject_unknown(g, {"generations", "population", "parents_kept", "mutation_rate",
                       "fitness_floor", "holdout"},
                   "ga");
    read_if(g, "generations", cfg.ga.generations);
    read_if(g, "population", cfg.ga.population);
    read_if(g, "parents_kept", cfg.ga.parents_kept);
    read_if(g, "mutation_rate", cfg.ga.mutation_rate);
    read_if(g, "fitness_floor", cfg.ga.fitness_floor);
    read_if(g, "holdout", cfg.ga.holdout);
  }
  if (doc.contains("experiment")) {
    const json& e = doc.at("experiment");
    reject_unknown(e, {"runs", "seed", "threads", "pfi_repeats", "hist_bins"}, "experiment");
    read_if(e, "runs", cfg.runs);
    read_if(e, "seed", cfg.seed);
    read_if(e, "threads", cfg.threads);
    read_if(e, "pfi_repeats", cfg.pfi_repeats);
    read_if(e, "hist_bins", cfg.hist_bins);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

json config_snapshot(const ExperimentConfig& cfg) {
  json location = nullptr;
  if (cfg.data.indicator.location) location = *cfg.data.indicator.location;
  return {
      {"data",
       {{"prices", cfg.data.prices},
        {"indicators", cfg.data.indicators},
        {"aligned", cfg.data.aligned},
        {"date_col", cfg.data.date_col},
        {"close_col", cfg.data.close_col},
        {"indicator_date_col", cfg.data.indicator.date_col},
        {"location_col", cfg.data.indicator.location_col},
        {"location", location},
        {"indicator_columns", cfg.data.indicator.columns},
        {"gap_policy", std::string(to_string(cfg.data.gap_policy))}}},
      {"horizon", cfg.data.horizon},
      {"lookback", cfg.lookback},
      {"split", {{"train", cfg.train}, {"test", cfg.test}}},
      {"ga",
       {{"generations", cfg.ga.generations},
        {"population", cfg.ga.population},
        {"parents_kept", cfg.ga.parents_kept},
        {"mutation_rate", cfg.ga.mutation_rate},
        {"fitness_floor", cfg.ga.fitness_floor},
        {"holdout", cfg.ga.holdout}}},
      {"experiment",
       {{"runs", cfg.runs},
        {"seed", cfg.seed},
        {"pfi_repeats", cfg.pfi_repeats},
        {"hist_bins", cfg.hist_bins}}},
  };
}

}  // namespace featgate
