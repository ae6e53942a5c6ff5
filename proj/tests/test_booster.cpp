#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "featgate/booster.hpp"
#include "featgate/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace featgate;
using testutil::error_of;

namespace {

struct TrainSet {
  FeatureMatrix x;
  std::vector<double> y;
};

TrainSet make_train_set(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
  std::vector<double> values(rows * cols);
  std::vector<double> y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) values[r * cols + c] = n(gen);
    const double a = values[r * cols];
    const double b = cols > 1 ? values[r * cols + 1] : 0.0;
    y[r] = std::sin(2 * a) + 0.5 * b * b + 0.3 * n(gen);
  }
  return {FeatureMatrix::from_values(names, std::move(values)), std::move(y)};
}

TrainSet step_data() {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(200);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    v[i] = u(gen);
    y[i] = v[i] > 0 ? 1.0 : 0.0;
  }
  return {FeatureMatrix::from_values({"x"}, v), y};
}

HyperParams step_params() {
  HyperParams hp;
  hp.num_leaves = 31;
  hp.n_estimators = 100;
  hp.learning_rate = 0.1;
  return hp;
}

double r2_of(const std::vector<double>& y, const std::vector<double>& p) { return oracle::r2(y, p); }

// Rows of the training matrix reaching each leaf of a tree.
std::vector<std::size_t> leaf_counts(const Tree& tree, const FeatureMatrix& x) {
  std::vector<std::size_t> counts(tree.nodes.size(), 0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    int node = 0;
    while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
      const auto& n = tree.nodes[static_cast<std::size_t>(node)];
      node = x.at(r, static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
    }
    ++counts[static_cast<std::size_t>(node)];
  }
  return counts;
}

}  // namespace

TEST_SUITE("booster") {
  TEST_CASE("constant target predicts the constant") {
    const auto d = make_train_set(60, 3, 1);
    const std::vector<double> y(60, 5.0);
    const auto m = fit(d.x, y, HyperParams{}, 1);
    for (double p : m.predict(d.x)) CHECK(p == 5.0);
    const auto other = make_train_set(10, 3, 99);
    for (double p : m.predict(other.x)) CHECK(p == 5.0);
  }

  TEST_CASE("one leaf gives input-independent predictions") {
    const auto d = make_train_set(100, 2, 2);
    HyperParams hp;
    hp.num_leaves = 1;
    hp.n_estimators = 50;
    const auto m = fit(d.x, d.y, hp, 3);
    double mean = 0.0;
    for (double v : d.y) mean += v;
    mean /= 100.0;
    const auto pred = m.predict(d.x);
    for (double p : pred) {
      CHECK(p == pred.front());
      CHECK(p == doctest::Approx(mean).epsilon(1e-12));
    }
    for (const auto& t : m.trees) CHECK(t.leaf_count() == 1);
  }

  TEST_CASE("step target reaches R2 0.95 and agrees with the exact-greedy oracle") {
    const auto d = step_data();
    const auto hp = step_params();
    const auto m = fit(d.x, d.y, hp, 7);
    const double r2 = r2_of(d.y, m.predict(d.x));
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < d.x.rows(); ++r) rows.push_back(std::vector<double>{d.x.at(r, 0)});
    const double oracle_r2 =
        r2_of(d.y, oracle::naive_boost_train(rows, d.y, hp.num_leaves, hp.n_estimators, hp.learning_rate,
                                             hp.min_child_samples, hp.reg_lambda));
    CHECK(r2 >= 0.95);
    CHECK(std::abs(r2 - oracle_r2) <= 0.02);
  }

  TEST_CASE("random regression agrees with the exact-greedy oracle") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto d = make_train_set(150, 2, 100 + seed);
      HyperParams hp;
      hp.num_leaves = 8;
      hp.n_estimators = 60;
      hp.learning_rate = 0.1;
      hp.min_child_samples = 10;
      std::vector<std::vector<double>> rows;
      for (std::size_t r = 0; r < d.x.rows(); ++r) rows.push_back(std::vector<double>{d.x.at(r, 0), d.x.at(r, 1)});
      const double a = r2_of(d.y, fit(d.x, d.y, hp, 1).predict(d.x));
      const double b = r2_of(d.y, oracle::naive_boost_train(rows, d.y, 8, 60, 0.1, 10, 0.0));
      CHECK(std::abs(a - b) <= 0.02);
    }
  }

  TEST_CASE("zero-tree model predicts the base score") {
    BoostedModel m;
    m.base_score = 1.25;
    m.feature_names = {"a"};
    const auto x = FeatureMatrix::from_values({"a"}, {1, 2, 3});
    CHECK(m.predict(x) == std::vector<double>{1.25, 1.25, 1.25});
  }

  TEST_CASE("hand-built split sends x <= threshold left") {
    BoostedModel m;
    m.feature_names = {"a"};
    Tree t;
    t.nodes = {{0, 0.5, 1, 2, 0.0}, {-1, 0, -1, -1, -1.0}, {-1, 0, -1, -1, 2.0}};
    m.trees = {t};
    m.tree_weights = {1.0};
    const auto x = FeatureMatrix::from_values({"a"}, {0.4, 0.5, 0.6});
    CHECK(m.predict(x) == std::vector<double>{-1.0, -1.0, 2.0});
    CHECK(error_of([&] { m.predict(FeatureMatrix::from_values({"a", "b"}, {1, 2})); }) ==
          ErrorCode::ShapeMismatch);
  }

  TEST_CASE("training loss is non-increasing for full-sample gbdt") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto d = make_train_set(80 + 10 * seed, 1 + seed % 4, seed);
      HyperParams hp;
      hp.num_leaves = 2 + static_cast<int>(seed * 5 % 60);
      hp.n_estimators = 40;
      hp.learning_rate = 0.01 + 0.0045 * static_cast<double>(seed);
      hp.min_child_samples = 10 + static_cast<int>(seed % 5);
      hp.reg_alpha = 0.05 * static_cast<double>(seed % 3);
      hp.reg_lambda = 0.1 * static_cast<double>(seed % 4);
      FitDiagnostics diag;
      fit(d.x, d.y, hp, seed, {}, &diag);
      REQUIRE(diag.train_sse.size() == 41);
      for (std::size_t i = 1; i < diag.train_sse.size(); ++i) {
        CHECK(diag.train_sse[i] <= diag.train_sse[i - 1] + 1e-12);
      }
    }
  }

  TEST_CASE("tree structure respects leaves, depth and child sizes") {
    const auto d = make_train_set(300, 3, 4);
    for (int depth : {-1, 5}) {
      HyperParams hp;
      hp.num_leaves = 40;
      hp.max_depth = depth;
      hp.min_child_samples = 15;
      hp.n_estimators = 10;
      const auto m = fit(d.x, d.y, hp, 2);
      for (const auto& t : m.trees) {
        CHECK(t.leaf_count() <= 40);
        if (depth > 0) CHECK(t.depth() <= depth);
        const auto counts = leaf_counts(t, d.x);
        for (std::size_t i = 0; i < t.nodes.size(); ++i) {
          if (t.nodes[i].is_leaf()) CHECK(counts[i] >= 15);
        }
      }
    }
  }

  TEST_CASE("leaf values shrink monotonically as lambda grows") {
    const auto d = step_data();
    HyperParams hp;
    hp.num_leaves = 2;
    hp.n_estimators = 1;
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : {0.0, 1.0, 10.0, 100.0, 1e4, 1e8}) {
      hp.reg_lambda = lambda;
      const auto m = fit(d.x, d.y, hp, 1);
      double biggest = 0.0;
      for (const auto& n : m.trees[0].nodes) {
        if (n.is_leaf()) biggest = std::max(biggest, std::abs(n.value));
      }
      CHECK(biggest <= previous);
      previous = biggest;
    }
    CHECK(previous < 1e-6);
  }

  TEST_CASE("row order does not change a gbdt fit") {
    const auto d = make_train_set(120, 3, 8);
    std::vector<std::size_t> perm(120);
    for (std::size_t i = 0; i < 120; ++i) perm[i] = i;
    std::mt19937_64 gen(1);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<double> values;
    std::vector<double> y;
    for (std::size_t i : perm) {
      for (std::size_t c = 0; c < 3; ++c) values.push_back(d.x.at(i, c));
      y.push_back(d.y[i]);
    }
    const auto shuffled = FeatureMatrix::from_values(d.x.column_names, values);
    const auto a = fit(d.x, d.y, HyperParams{}, 5);
    const auto b = fit(shuffled, y, HyperParams{}, 5);
    CHECK(a == b);
  }

  TEST_CASE("fits are bit-identical across thread counts for every variant") {
    const auto d = make_train_set(400, 4, 9);
    for (auto type : param_space::kBoostingTypes) {
      HyperParams hp;
      hp.boosting_type = type;
      hp.subsample = 0.7;
      hp.colsample_bytree = 0.6;
      hp.n_estimators = 30;
      FitOptions serial;
      FitOptions two;
      two.threads = 2;
      two.parallel_min_work = 1;
      FitOptions all;
      all.threads = 0;
      all.parallel_min_work = 1;
      const auto m1 = fit(d.x, d.y, hp, 3, serial);
      CHECK(m1 == fit(d.x, d.y, hp, 3, two));
      CHECK(m1 == fit(d.x, d.y, hp, 3, all));
      CHECK(m1 == fit(d.x, d.y, hp, 3, serial));
      CHECK(m1.predict(d.x) == m1.predict(d.x));
    }
  }

  TEST_CASE("gbdt and goss use the learning rate as every tree weight") {
    const auto d = make_train_set(200, 2, 10);
    for (auto type : {BoostingType::Gbdt, BoostingType::Goss}) {
      HyperParams hp;
      hp.boosting_type = type;
      hp.learning_rate = 0.05;
      const auto m = fit(d.x, d.y, hp, 1);
      for (double w : m.tree_weights) CHECK(w == 0.05);
    }
  }

  TEST_CASE("bagging draws ceil(rate * n) rows and goss ignores subsample") {
    const auto d = make_train_set(101, 2, 11);
    HyperParams hp;
    hp.subsample = 0.55;
    hp.n_estimators = 5;
    FitDiagnostics diag;
    fit(d.x, d.y, hp, 1, {}, &diag);
    for (std::size_t n : diag.rows_per_tree) CHECK(n == 56);
    hp.boosting_type = BoostingType::Goss;
    FitDiagnostics g;
    fit(d.x, d.y, hp, 1, {}, &g);
    for (std::size_t n : g.rows_per_tree) CHECK(n == 21 + 11);
  }

  TEST_CASE("variants change the model and stay predictive") {
    const auto d = make_train_set(300, 2, 12);
    HyperParams hp;
    hp.n_estimators = 60;
    const auto base = fit(d.x, d.y, hp, 4);
    hp.boosting_type = BoostingType::Dart;
    const auto dart = fit(d.x, d.y, hp, 4);
    CHECK_FALSE(dart == base);
    CHECK(r2_of(d.y, dart.predict(d.x)) > 0.5);
    hp.boosting_type = BoostingType::Goss;
    CHECK(r2_of(d.y, fit(d.x, d.y, hp, 4).predict(d.x)) > 0.5);
  }

  TEST_CASE("GOSS sampling") {
    std::vector<double> g{0.1, -5, 0.2, 3, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    const auto s = sample_rows_goss(g, 0.2, 0.1, 1);
    REQUIRE(s.rows.size() == 3);
    CHECK(std::count(s.weights.begin(), s.weights.end(), 1.0) == 2);
    CHECK(std::count(s.weights.begin(), s.weights.end(), 8.0) == 1);
    CHECK(std::find(s.rows.begin(), s.rows.end(), 1) != s.rows.end());
    CHECK(std::find(s.rows.begin(), s.rows.end(), 3) != s.rows.end());

    const std::vector<double> flat(10, 1.0);
    const auto t = sample_rows_goss(flat, 0.2, 0.1, 9);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (t.weights[i] == 1.0) CHECK(t.rows[i] < 2);
    }
    CHECK(error_of([&] { sample_rows_goss(g, 0.0, 0.1, 1); }) == ErrorCode::InvalidRates);
    CHECK(error_of([&] { sample_rows_goss(g, 0.6, 0.5, 1); }) == ErrorCode::InvalidRates);
  }

  TEST_CASE("GOSS weighted gradient sum is unbiased within 10 percent") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::vector<double> g(1000);
    double exact = 0.0;
    for (double& v : g) {
      v = u(gen);
      exact += v;
    }
    double mean_estimate = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto s = sample_rows_goss(g, 0.2, 0.1, seed);
      double est = 0.0;
      for (std::size_t i = 0; i < s.rows.size(); ++i) est += g[s.rows[i]] * s.weights[i];
      mean_estimate += est / 100.0;
    }
    CHECK(std::abs(mean_estimate - exact) <= 0.1 * exact);
  }

  TEST_CASE("DART drops") {
    const auto none = dart_drop(10, 0.0, 1);
    CHECK(none.dropped.empty());
    CHECK(none.new_tree_factor == 1.0);
    const auto one = dart_drop(1, 1.0, 1);
    CHECK(one.dropped == std::vector<std::size_t>{0});
    CHECK(one.new_tree_factor == 0.5);
    CHECK(one.dropped_factor == 0.5);
    CHECK(dart_drop(5, 1.0, 2).dropped.size() == 4);
    CHECK(dart_drop(0, 0.5, 2).dropped.empty());
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) total += static_cast<double>(dart_drop(10, 0.1, seed).dropped.size());
    CHECK(std::abs(total / 1000.0 - 1.0) <= 0.15);
  }

  TEST_CASE("fit errors") {
    const auto d = make_train_set(30, 2, 13);
    HyperParams hp;
    hp.min_child_samples = 20;
    CHECK(error_of([&] { fit(d.x, d.y, hp, 1); }) == ErrorCode::TooFewRows);
    CHECK(error_of([&] { fit(d.x, std::vector<double>{}, hp, 1); }) == ErrorCode::DegenerateTarget);
    CHECK(error_of([&] { fit(d.x, std::vector<double>(29, 1.0), hp, 1); }) == ErrorCode::ShapeMismatch);
    auto y = make_train_set(60, 2, 14);
    y.y[3] = std::nan("");
    hp.min_child_samples = 10;
    CHECK(error_of([&] { fit(y.x, y.y, hp, 1); }) == ErrorCode::NonFiniteInput);
  }

  TEST_CASE("bin thresholds are midpoints, at most 255 bins") {
    CHECK(bin_thresholds(std::vector<double>{1, 1, 2, 3, 3}) == std::vector<double>{1.5, 2.5});
    CHECK(bin_thresholds(std::vector<double>{4, 4, 4}).empty());
    std::vector<double> many(5000);
    for (std::size_t i = 0; i < many.size(); ++i) many[i] = static_cast<double>(i);
    const auto t = bin_thresholds(many);
    CHECK(t.size() <= 254);
    CHECK(t.size() >= 200);
    CHECK(std::is_sorted(t.begin(), t.end()));
    for (double v : t) CHECK(v - std::floor(v) == 0.5);
  }

  TEST_CASE("model JSON round-trips to identical predictions") {
    const auto d = make_train_set(200, 3, 15);
    HyperParams hp;
    hp.boosting_type = BoostingType::Dart;
    hp.n_estimators = 25;
    const auto m = fit(d.x, d.y, hp, 6);
    const auto doc = model_to_json(m);
    CHECK(doc["format"] == "featgate.model");
    const auto back = model_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(back == m);
    CHECK(back.predict(d.x) == m.predict(d.x));
    auto broken = doc;
    broken["trees"][0]["nodes"][0]["left"] = 999;
    CHECK(error_of([&] { model_from_json(broken); }) == ErrorCode::BadModel);
    CHECK(error_of([] { model_from_json(nlohmann::json::object()); }) == ErrorCode::BadModel);
  }

  TEST_CASE("search space bounds") {
    HyperParams hp;
    CHECK(hp.in_search_space());
    hp.num_leaves = 101;
    CHECK_FALSE(hp.in_search_space());
    hp.num_leaves = 0;
    CHECK(error_of([&] { hp.validate(); }) == ErrorCode::InvalidArgument);
  }
}
