// Acceptance suite: prints one PASS/FAIL/SKIP line per criterion.
// Criterion 8 needs a real-data config: set FEATGATE_REAL_CONFIG to a config
// JSON whose data section points at the price and indicator files.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <unistd.h>

#include "featgate/booster.hpp"
#include "featgate/config.hpp"
#include "featgate/csv.hpp"
#include "featgate/experiment.hpp"
#include "featgate/featwin.hpp"
#include "featgate/gaopt.hpp"
#include "featgate/metrics.hpp"
#include "featgate/synth.hpp"
#include "oracles.hpp"

using namespace featgate;
namespace fs = std::filesystem;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

int g_failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {Verdict::Fail, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out.verdict == Verdict::Pass && budget_s > 0 && secs > budget_s) {
    out.verdict = Verdict::Fail;
    out.detail += "; over time budget";
  }
  const char* tag = out.verdict == Verdict::Pass ? "PASS" : out.verdict == Verdict::Fail ? "FAIL" : "SKIP";
  if (out.verdict == Verdict::Fail) ++g_failures;
  std::printf("[%s] %d %s: %s (%.2f s)\n", tag, id, title, out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("featgate_accept_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

Outcome window_oracle() {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> len(1, 7);
  std::normal_distribution<double> val(0.0, 5.0);
  std::size_t mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> w(static_cast<std::size_t>(len(gen)));
    for (double& v : w) v = val(gen);
    for (FunctionCode code : all_function_codes()) {
      const auto got = apply_fc(w, code);
      const auto want = oracle::window_stat(w, static_cast<int>(code));
      if (got.size() != want.size()) {
        ++mismatches;
        continue;
      }
      for (std::size_t i = 0; i < got.size(); ++i) mismatches += close_rel(got[i], want[i], 1e-12) ? 0 : 1;
    }
  }
  return {mismatches == 0 ? Verdict::Pass : Verdict::Fail,
          "1000 windows x 16 codes, " + std::to_string(mismatches) + " mismatches"};
}

Outcome metric_identities() {
  const std::vector<double> y{0, 1, 2};
  const auto perfect = compute_metrics(y, y);
  const auto mean = compute_metrics(y, std::vector<double>{1, 1, 1});
  const auto hand = compute_metrics(y, std::vector<double>{0, 1, 1});
  const bool ok = perfect.r2 == 1.0 && mean.r2 == 0.0 && std::abs(hand.r2 - 0.5) <= 1e-15 &&
                  std::abs(hand.mae - 1.0 / 3.0) <= 1e-15 && std::abs(hand.rmse - std::sqrt(1.0 / 3.0)) <= 1e-15;
  return {ok ? Verdict::Pass : Verdict::Fail,
          fmt("perfect r2 %.17g, mean r2 %.17g, hand r2 %.17g", perfect.r2, mean.r2, hand.r2)};
}

Outcome mann_whitney() {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> d(0, 9);
  std::size_t cases = 0;
  std::size_t u_bad = 0;
  double worst_p = 0.0;
  double worst_normal = 0.0;
  for (std::size_t n1 = 1; n1 <= 11; ++n1) {
    for (std::size_t n2 = 1; n1 + n2 <= 12; ++n2) {
      for (int s = 0; s < 200; ++s) {
        std::vector<double> a(n1);
        std::vector<double> b(n2);
        for (double& v : a) v = d(gen);
        for (double& v : b) v = d(gen);
        const auto got = mann_whitney_u(a, b);
        const auto want = oracle::mann_whitney_exact(a, b);
        ++cases;
        u_bad += got.u_statistic == want.u ? 0 : 1;
        worst_p = std::max(worst_p, std::abs(got.p_value - want.p));
        worst_normal = std::max(worst_normal, std::abs(mann_whitney_u(a, b, UTestMethod::Normal).p_value - want.p));
      }
    }
  }
  const bool ok = u_bad == 0 && worst_p <= 0.05;
  return {ok ? Verdict::Pass : Verdict::Fail,
          std::to_string(cases) + " cases, U mismatches " + std::to_string(u_bad) +
              fmt(", max |p - exact| %.3g (normal-only path would be %.3g)", worst_p, worst_normal)};
}

Outcome pfi_oracle() {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::size_t rows = 50;
  const std::size_t cols = 5;
  std::vector<double> v(rows * cols);
  std::vector<double> y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] = n(gen);
    y[r] = 1.5 * v[r * cols] - v[r * cols + 2] + 0.3 * n(gen);
  }
  const auto x = FeatureMatrix::from_values({"a", "b", "c", "d", "e"}, v);
  HyperParams hp;
  hp.min_child_samples = 10;
  hp.num_leaves = 6;
  const auto model = fit(x, y, hp, 1);
  PfiOptions opt;
  opt.repeats = 10;
  opt.seed = 123;
  const auto got = permutation_importance(model, x, y, opt);
  const double base = compute_metrics(y, model.predict(x)).r2;
  std::size_t bad = 0;
  for (const auto& e : got) {
    double sum = 0.0;
    for (std::size_t r = 0; r < opt.repeats; ++r) {
      const auto perm = seeded_permutation(rows, opt.seed, e.column, r);
      std::vector<double> pv = v;
      for (std::size_t i = 0; i < rows; ++i) pv[i * cols + e.column] = v[perm[i] * cols + e.column];
      sum += base - compute_metrics(y, model.predict(FeatureMatrix::from_values(x.column_names, pv))).r2;
    }
    bad += e.r2_drop == sum / static_cast<double>(opt.repeats) ? 0 : 1;
  }
  return {bad == 0 && got.size() == cols ? Verdict::Pass : Verdict::Fail,
          "5 columns x 10 repeats, " + std::to_string(bad) + " inexact columns"};
}

Outcome booster_sanity() {
  std::size_t loss_violations = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::mt19937_64 gen(s);
    std::normal_distribution<double> n(0.0, 1.0);
    const std::size_t rows = 100 + 15 * s;
    const std::size_t cols = 1 + s % 4;
    std::vector<double> v(rows * cols);
    std::vector<double> y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] = n(gen);
      y[r] = std::tanh(v[r * cols]) + 0.5 * n(gen);
    }
    HyperParams hp;
    hp.num_leaves = 3 + static_cast<int>(s * 4);
    hp.learning_rate = 0.005 + 0.004 * static_cast<double>(s);
    hp.n_estimators = 50;
    hp.min_child_samples = 10 + static_cast<int>(s % 3) * 5;
    hp.reg_alpha = 0.05 * static_cast<double>(s % 4);
    hp.reg_lambda = 0.1 * static_cast<double>(s % 5);
    FitDiagnostics diag;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
    fit(FeatureMatrix::from_values(names, v), y, hp, s, {}, &diag);
    for (std::size_t i = 1; i < diag.train_sse.size(); ++i) {
      loss_violations += diag.train_sse[i] <= diag.train_sse[i - 1] + 1e-12 ? 0 : 1;
    }
  }

  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> sx(200);
  std::vector<double> sy(200);
  for (std::size_t i = 0; i < 200; ++i) {
    sx[i] = u(gen);
    sy[i] = sx[i] > 0 ? 1.0 : 0.0;
  }
  const auto step_x = FeatureMatrix::from_values({"x"}, sx);
  HyperParams step;
  step.num_leaves = 31;
  step.n_estimators = 100;
  step.learning_rate = 0.1;
  const double step_r2 = compute_metrics(sy, fit(step_x, sy, step, 1).predict(step_x)).r2;

  HyperParams one = step;
  one.num_leaves = 1;
  const auto flat = fit(step_x, sy, one, 1).predict(step_x);
  bool constant = true;
  for (double p : flat) constant = constant && p == flat.front();

  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> dv(500 * 4);
  std::vector<double> dy(500);
  for (double& x : dv) x = n(gen);
  for (std::size_t r = 0; r < 500; ++r) dy[r] = dv[r * 4] * dv[r * 4 + 1] + n(gen) * 0.1;
  const auto dx = FeatureMatrix::from_values({"a", "b", "c", "d"}, dv);
  bool identical = true;
  for (auto type : param_space::kBoostingTypes) {
    HyperParams hp;
    hp.boosting_type = type;
    hp.subsample = 0.8;
    hp.colsample_bytree = 0.75;
    FitOptions o1;
    FitOptions o2;
    o2.threads = 2;
    o2.parallel_min_work = 1;
    FitOptions omax;
    omax.threads = 0;
    omax.parallel_min_work = 1;
    const auto m1 = fit(dx, dy, hp, 9, o1);
    identical = identical && m1 == fit(dx, dy, hp, 9, o2) && m1 == fit(dx, dy, hp, 9, omax) &&
                m1.predict(dx) == fit(dx, dy, hp, 9, omax).predict(dx);
  }
  const bool ok = loss_violations == 0 && step_r2 >= 0.95 && constant && identical;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "loss increases " + std::to_string(loss_violations) + fmt(", step R2 %.4f", step_r2) +
              (constant ? ", 1-leaf constant" : ", 1-leaf NOT constant") +
              (identical ? ", bit-identical across 1/2/max threads" : ", thread-dependent output")};
}

Outcome ga_convergence() {
  const std::size_t pool = 3;
  std::size_t converged = 0;
  std::size_t monotone = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 31; ++seed) {
    GAConfig cfg;
    cfg.seed = 1000 + seed;
    const auto r = run_search(cfg, pool, [](const Genome& g, std::uint64_t) {
      const double d = g[HpGene::LearningRate] - 0.05;
      return EvalOutcome{-d * d, {}, false};
    });
    const double err = std::abs(r.best_genome[HpGene::LearningRate] - 0.05);
    worst = std::max(worst, err);
    converged += err <= 0.005 && r.fitness_history.size() <= 150 ? 1 : 0;
    monotone += std::is_sorted(r.fitness_history.begin(), r.fitness_history.end()) ? 1 : 0;
  }
  return {converged == 31 && monotone == 31 ? Verdict::Pass : Verdict::Fail,
          std::to_string(converged) + "/31 within 0.005, " + std::to_string(monotone) +
              fmt("/31 monotone, worst error %.2e", worst)};
}

const MetricComparison& metric(const ComparisonReport& r, const std::string& name) {
  for (const auto& m : r.metrics) {
    if (m.metric == name) return m;
  }
  throw std::runtime_error("metric missing: " + name);
}

std::string summary(const ComparisonReport& r) {
  std::string s;
  for (const auto& m : r.metrics) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s base %.4f aug %.4f (%+.1f%%) p %.3g; ", m.metric.c_str(), m.mean_baseline,
                  m.mean_augmented, m.percent_change, m.u_test.p_value);
    s += buf;
  }
  if (!s.empty()) s.resize(s.size() - 2);
  return s;
}

Outcome synthetic_experiment() {
  ScratchDir dir("synthetic");
  const auto d = injected_signal_dataset(SyntheticOptions{});
  ExperimentConfig cfg = default_config();
  cfg.runs = 11;
  cfg.ga.generations = 40;
  cfg.seed = 42;
  const std::array<Arm, 2> arms{Arm::Baseline, Arm::Augmented};
  const auto out = run_experiment(d, cfg, arms, dir.path());
  const auto& r2 = metric(*out.report, "r2");
  const auto& rmse = metric(*out.report, "rmse");
  const bool ok = r2.mean_augmented > r2.mean_baseline && r2.u_test.p_value < 0.01 &&
                  rmse.mean_augmented < rmse.mean_baseline && rmse.u_test.p_value < 0.01;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "558 rows, M=11, 40 generations; " + summary(*out.report)};
}

Outcome real_data() {
  const char* path = std::getenv("FEATGATE_REAL_CONFIG");
  if (!path || !*path) {
    return {Verdict::Skip, "no real-data fixture; set FEATGATE_REAL_CONFIG to run (hours)"};
  }
  ExperimentConfig cfg = load_config(path);
  cfg.runs = 31;
  cfg.ga.generations = 150;
  cfg.train = 358;
  cfg.test = 200;
  const auto d = load_experiment_data(cfg);
  const char* out_env = std::getenv("FEATGATE_REAL_OUT");
  const fs::path out = out_env && *out_env ? fs::path(out_env) : fs::temp_directory_path() / "featgate_real_results";
  const std::array<Arm, 2> arms{Arm::Baseline, Arm::Augmented};
  const auto res = run_experiment(d, cfg, arms, out);
  const auto& r2 = metric(*res.report, "r2");
  const auto& rmse = metric(*res.report, "rmse");
  const bool ok = r2.mean_augmented > r2.mean_baseline && r2.u_test.p_value < 0.05 &&
                  rmse.mean_augmented < rmse.mean_baseline && rmse.u_test.p_value < 0.05;
  return {ok ? Verdict::Pass : Verdict::Fail,
          std::to_string(d.rows()) + " aligned rows, results in " + out.string() + "; " + summary(*res.report)};
}

Outcome determinism() {
  ScratchDir a("det_a");
  ScratchDir b("det_b");
  SyntheticOptions opt;
  opt.rows = 200;
  const auto d = injected_signal_dataset(opt);
  ExperimentConfig cfg = default_config();
  cfg.runs = 2;
  cfg.ga.generations = 5;
  cfg.train = 120;
  cfg.test = 66;
  cfg.seed = 11;
  const std::array<Arm, 2> arms{Arm::Baseline, Arm::Augmented};
  cfg.threads = 1;
  run_experiment(d, cfg, arms, a.path());
  cfg.threads = 0;
  run_experiment(d, cfg, arms, b.path());
  const auto ra = read_text_file(a.path() / "report.json");
  const auto rb = read_text_file(b.path() / "report.json");
  return {ra == rb ? Verdict::Pass : Verdict::Fail,
          "M=2, 5 generations, report.json " + std::to_string(ra.size()) + " bytes, " +
              (ra == rb ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  criterion(1, "Window-statistic oracle equivalence", 1.0, window_oracle);
  criterion(2, "Metric identities", 1.0, metric_identities);
  criterion(3, "Mann-Whitney correctness", 10.0, mann_whitney);
  criterion(4, "PFI oracle equivalence", 5.0, pfi_oracle);
  criterion(5, "Booster sanity", 30.0, booster_sanity);
  criterion(6, "GA convergence", 60.0, ga_convergence);
  criterion(7, "Synthetic injected-signal experiment", 600.0, synthetic_experiment);
  criterion(8, "Real-data directional reproduction", 0.0, real_data);
  criterion(9, "End-to-end determinism", 60.0, determinism);
  return g_failures == 0 ? 0 : 1;
}
