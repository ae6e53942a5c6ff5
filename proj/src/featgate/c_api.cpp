#include "featgate/featgate.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "featgate/config.hpp"
#include "featgate/csv.hpp"
#include "featgate/error.hpp"
#include "featgate/experiment.hpp"
#include "featgate/featwin.hpp"
#include "featgate/metrics.hpp"
#include "featgate/synth.hpp"

struct fg_config {
  featgate::ExperimentConfig cfg;
};

struct fg_dataset {
  featgate::AlignedDataset data;
};

struct fg_model {
  featgate::BoostedModel model;
  nlohmann::json context;
};

struct fg_pfi_result {
  std::vector<featgate::PfiEntry> entries;
  double baseline_r2 = 0.0;
};

namespace {

using featgate::Error;
using featgate::ErrorCategory;
using featgate::ErrorCode;

thread_local std::string g_last_error;

fg_status status_of(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config:
      return FG_ERR_CONFIG;
    case ErrorCategory::Data:
      return FG_ERR_DATA;
    case ErrorCategory::Io:
      return FG_ERR_IO;
  }
  return FG_ERR_INTERNAL;
}

template <typename Fn>
fg_status guarded(Fn&& fn) {
  try {
    fn();
    return FG_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.category());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("InvalidConfig: ") + e.what();
    return FG_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FG_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) featgate::fail(ErrorCode::InvalidArgument, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}


}  // namespace

extern "C" {

const char* fg_version(void) { return "1.0.0"; }

const char* fg_last_error(void) { return g_last_error.c_str(); }

void fg_string_free(char* s) { std::free(s); }

fg_status fg_config_default(fg_config** out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = new fg_config{featgate::default_config()};
  });
}

fg_status fg_config_load(const char* path, fg_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new fg_config{featgate::load_config(path)};
  });
}

#define FG_CONFIG_SETTER(name, type, body)        \
  fg_status name(fg_config* cfg, type value) {    \
    return guarded([&] {                          \
      require(cfg != nullptr, "null config");     \
      auto c = cfg->cfg;                          \
      body;                                       \
      c.validate();                               \
      cfg->cfg = std::move(c);                    \
    });                                           \
  }

FG_CONFIG_SETTER(fg_config_set_runs, size_t, c.runs = value)
FG_CONFIG_SETTER(fg_config_set_seed, uint64_t, c.seed = value)
FG_CONFIG_SETTER(fg_config_set_threads, size_t, c.threads = value)
FG_CONFIG_SETTER(fg_config_set_generations, size_t, c.ga.generations = value)
FG_CONFIG_SETTER(fg_config_set_holdout, size_t, c.ga.holdout = value)
FG_CONFIG_SETTER(fg_config_set_prices, const char*, c.data.prices = value ? value : "")
FG_CONFIG_SETTER(fg_config_set_indicators, const char*, c.data.indicators = value ? value : "")
FG_CONFIG_SETTER(fg_config_set_aligned, const char*, c.data.aligned = value ? value : "")

#undef FG_CONFIG_SETTER

fg_status fg_config_to_json(const fg_config* cfg, char** out_json) {
  return guarded([&] {
    require(cfg != nullptr && out_json != nullptr, "null argument");
    *out_json = copy_string(featgate::dump_json(featgate::config_snapshot(cfg->cfg)));
  });
}

void fg_config_free(fg_config* cfg) { delete cfg; }

fg_status fg_dataset_ingest(const fg_config* cfg, fg_dataset** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    *out = new fg_dataset{featgate::load_experiment_data(cfg->cfg)};
  });
}

fg_status fg_dataset_load(const char* path, fg_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new fg_dataset{featgate::load_dataset(path)};
  });
}

fg_status fg_dataset_synthetic(size_t rows, uint64_t seed, fg_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    featgate::SyntheticOptions options;
    if (rows > 0) options.rows = rows;
    options.seed = seed;
    *out = new fg_dataset{featgate::injected_signal_dataset(options)};
  });
}

fg_status fg_dataset_save(const fg_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds != nullptr && path != nullptr, "null argument");
    featgate::save_dataset(ds->data, path);
  });
}

size_t fg_dataset_rows(const fg_dataset* ds) { return ds ? ds->data.rows() : 0; }

size_t fg_dataset_series_count(const fg_dataset* ds) { return ds ? ds->data.names.size() : 0; }

void fg_dataset_free(fg_dataset* ds) { delete ds; }

fg_status fg_experiment_run(const fg_dataset* ds, const fg_config* cfg, int arms,
                            const char* out_dir, fg_progress_fn progress, void* user) {
  return guarded([&] {
    require(ds != nullptr && cfg != nullptr && out_dir != nullptr, "null argument");
    std::vector<featgate::Arm> list;
    if (arms & FG_ARM_BASELINE) list.push_back(featgate::Arm::Baseline);
    if (arms & FG_ARM_AUGMENTED) list.push_back(featgate::Arm::Augmented);
    require(!list.empty() && (arms & ~FG_ARM_BOTH) == 0, "arms must be a non-empty fg_arms mask");
    featgate::ProgressFn fn;
    if (progress) {
      fn = [&](const featgate::RunRecord& r, bool resumed) {
        const std::string arm(featgate::to_string(r.arm));
        progress(arm.c_str(), r.run_index, r.test_metrics.r2, resumed ? 1 : 0, user);
      };
    }
    featgate::run_experiment(ds->data, cfg->cfg, list, out_dir, fn);
  });
}

fg_status fg_report_build(const char* results_dir, const char* out_dir, char** out_summary) {
  return guarded([&] {
    require(results_dir != nullptr && out_dir != nullptr, "null argument");
    const auto report = featgate::report_from_results(results_dir, out_dir);
    if (out_summary) *out_summary = copy_string(featgate::dump_json(featgate::report_to_json(report)));
  });
}

fg_status fg_model_load(const char* path, fg_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(featgate::read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      featgate::fail(ErrorCode::BadModel, std::string(path) + ": " + e.what());
    }
    auto model = featgate::model_from_json(doc);
    nlohmann::json context = doc.contains("context") ? doc["context"] : nlohmann::json();
    *out = new fg_model{std::move(model), std::move(context)};
  });
}

size_t fg_model_feature_count(const fg_model* model) {
  return model ? model->model.feature_names.size() : 0;
}

size_t fg_model_tree_count(const fg_model* model) { return model ? model->model.trees.size() : 0; }

fg_status fg_model_predict(const fg_model* model, const double* x, size_t rows, size_t cols,
                           double* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr && (x != nullptr || rows * cols == 0), "null argument");
    auto m = featgate::FeatureMatrix::from_values(model->model.feature_names,
                                                  std::vector<double>(x, x + rows * cols));
    if (cols != m.cols()) {
      featgate::fail(ErrorCode::ShapeMismatch, "expected " + std::to_string(m.cols()) + " columns");
    }
    const auto pred = featgate::predict(model->model, m);
    std::copy(pred.begin(), pred.end(), out);
  });
}

void fg_model_free(fg_model* model) { delete model; }

fg_status fg_pfi_compute(const fg_model* model, const fg_dataset* ds, int rows, size_t repeats,
                         const uint64_t* seed, fg_pfi_result** out) {
  return guarded([&] {
    require(model != nullptr && ds != nullptr && out != nullptr, "null argument");
    require(rows == FG_ROWS_TEST || rows == FG_ROWS_ALL, "rows must be FG_ROWS_TEST or FG_ROWS_ALL");
    const auto& ctx = model->context;
    if (!ctx.is_object() || !ctx.contains("feature_specs")) {
      featgate::fail(ErrorCode::BadModel, "model has no feature context");
    }
    const int horizon = ctx.at("horizon").get<int>();
    if (horizon != ds->data.horizon) {
      featgate::fail(ErrorCode::ShapeMismatch, "model horizon " + std::to_string(horizon) +
                                                   " differs from dataset horizon " +
                                                   std::to_string(ds->data.horizon));
    }
    std::vector<featgate::FeatureSpec> specs;
    for (const auto& s : ctx.at("feature_specs")) {
      specs.push_back(featgate::FeatureSpec::parse_compact(s.get<std::string>()));
    }
    const int lookback = ctx.at("lookback").get<int>();
    auto x = featgate::build_matrix(ds->data, specs, lookback);
    auto y = featgate::matrix_targets(ds->data, lookback);
    if (x.column_names != model->model.feature_names) {
      featgate::fail(ErrorCode::BadModel, "feature context does not match model columns");
    }
    if (rows == FG_ROWS_TEST) {
      const auto split = featgate::chronological_split(x.rows(), ctx.at("train_end").get<std::size_t>(),
                                                       ctx.at("test_len").get<std::size_t>());
      x = x.slice_rows(split.train_end, split.train_end + split.test_len);
      y = std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(split.train_end),
                              y.begin() + static_cast<std::ptrdiff_t>(split.train_end + split.test_len));
    }
    featgate::PfiOptions options;
    options.repeats = repeats > 0 ? repeats : ctx.value("pfi_repeats", std::size_t{10});
    options.seed = seed ? *seed : ctx.value("pfi_seed", std::uint64_t{0});
    auto res = std::make_unique<fg_pfi_result>();
    res->baseline_r2 = featgate::compute_metrics_partial(y, featgate::predict(model->model, x)).r2;
    res->entries = featgate::permutation_importance(model->model, x, y, options);
    *out = res.release();
  });
}

size_t fg_pfi_count(const fg_pfi_result* res) { return res ? res->entries.size() : 0; }

const char* fg_pfi_feature(const fg_pfi_result* res, size_t i) {
  if (!res || i >= res->entries.size()) return nullptr;
  return res->entries[i].feature.c_str();
}

size_t fg_pfi_column(const fg_pfi_result* res, size_t i) {
  if (!res || i >= res->entries.size()) return 0;
  return res->entries[i].column;
}

double fg_pfi_r2_drop(const fg_pfi_result* res, size_t i) {
  if (!res || i >= res->entries.size()) return 0.0;
  return res->entries[i].r2_drop;
}

double fg_pfi_baseline_r2(const fg_pfi_result* res) { return res ? res->baseline_r2 : 0.0; }

fg_status fg_pfi_to_json(const fg_pfi_result* res, char** out_json) {
  return guarded([&] {
    require(res != nullptr && out_json != nullptr, "null argument");
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : res->entries) {
      entries.push_back({{"feature", e.feature}, {"column", e.column}, {"r2_drop", e.r2_drop},
                         {"repeats", e.repeats}});
    }
    nlohmann::json doc = {{"baseline_r2", std::isfinite(res->baseline_r2)
                                              ? nlohmann::json(res->baseline_r2)
                                              : nlohmann::json(nullptr)},
                          {"importance", entries}};
    *out_json = copy_string(featgate::dump_json(doc));
  });
}

void fg_pfi_free(fg_pfi_result* res) { delete res; }

}  // extern "C"
