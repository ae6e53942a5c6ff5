#include <cmath>
#include <random>

#include "doctest.h"
#include "featgate/gaopt.hpp"
#include "featgate/synth.hpp"
#include "test_util.hpp"

using namespace featgate;
using testutil::error_of;

namespace {

const std::vector<std::string> kPool{"Returns", "DayOfWeek_cos", "DOY_cos", "noise"};

Genome lower_bound_genome() {
  Genome g;
  const auto specs = gene_specs(kPool.size());
  for (std::size_t i = 0; i < kGeneCount; ++i) {
    set_gene(g, i, specs[i].kind == GeneKind::Categorical ? specs[i].options.front() : specs[i].lo);
  }
  return g;
}

// Returns and indicator are white noise, so nothing is predictable.
AlignedDataset white_noise_dataset(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  AlignedDataset d;
  d.names = kPool;
  d.columns.assign(kPool.size(), {});
  const std::size_t rows = 200;
  for (std::size_t i = 0; i < rows; ++i) {
    d.dates.push_back(testutil::ymd(2021, 1, 1) + std::chrono::days(static_cast<int>(i)));
    for (auto& c : d.columns) c.push_back(n(gen));
  }
  for (std::size_t i = 0; i < rows; ++i) d.target.push_back(n(gen));
  d.horizon = 7;
  d.pool_tag = PoolTag::Augmented;
  return d;
}

Genome single_feature_genome(int series, int w0, int wl, int fc) {
  Genome g;
  g[HpGene::BoostingType] = 0;
  g[HpGene::NumLeaves] = 15;
  g[HpGene::MaxDepth] = 0;
  g[HpGene::LearningRate] = 0.1;
  g[HpGene::Estimators] = 100;
  g[HpGene::Subsample] = 1.0;
  g[HpGene::Colsample] = 1.0;
  g[HpGene::MinChildSamples] = 20;
  g[HpGene::RegAlpha] = 0.0;
  g[HpGene::RegLambda] = 0.0;
  g.slots[0] = {series, w0, wl, fc};
  return g;
}

GAConfig small_config(std::uint64_t seed) {
  GAConfig cfg;
  cfg.generations = 3;
  cfg.population = 6;
  cfg.parents_kept = 2;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("gaopt") {
  TEST_CASE("lower-bound genes decode to the lower corner of the search space") {
    const auto d = decode(lower_bound_genome(), kPool);
    const HyperParams want{BoostingType::Gbdt, 1, -1, 0.001, 3, 0.5, 0.5, 10, 0.0, 0.0};
    CHECK(d.params == want);
  }

  TEST_CASE("all-disabled genomes are repaired to a mean window of the first series") {
    Genome g = lower_bound_genome();
    for (auto& s : g.slots) s.fc = -1;
    CHECK(repair(g, kPool.size()));
    CHECK(g.slots[0] == FeatureSlot{0, 0, 7, 1});
    const auto d = decode(g, kPool);
    REQUIRE(d.enabled().size() == 1);
    CHECK(d.enabled()[0] == FeatureSpec{"Returns", 0, 7, FunctionCode::Mean});
    Genome off = lower_bound_genome();
    for (auto& s : off.slots) s.fc = -1;
    CHECK(decode(off, kPool).repaired);
  }

  TEST_CASE("encode inverts decode on random genomes") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
      const Genome g = random_genome(rng, kPool.size());
      REQUIRE(genes_in_range(g, kPool.size()));
      const auto d = decode(g, kPool, true);
      CHECK(encode(d, kPool) == g);
      CHECK(d.enabled().size() <= kMaxEnabledFeatures);
      CHECK(d.enabled().size() >= 1);
      CHECK(d.params.in_search_space());
    }
  }

  TEST_CASE("out-of-range genes clamp and flag, or throw when strict") {
    Genome g = single_feature_genome(0, 0, 3, 1);
    g[HpGene::NumLeaves] = 500;
    g.slots[1] = {9, 12, 0, 2};
    const auto d = decode(g, kPool);
    CHECK(d.repaired);
    CHECK(d.params.num_leaves == 100);
    CHECK(error_of([&] { decode(g, kPool, true); }) == ErrorCode::OutOfRangeGene);
    CHECK(repair(g, kPool.size()));
    CHECK(genes_in_range(g, kPool.size()));
  }

  TEST_CASE("gene layout") {
    const auto specs = gene_specs(kPool.size());
    REQUIRE(specs.size() == kGeneCount);
    CHECK(kGeneCount == 34);
    CHECK(specs[kHpGenes].hi == 3.0);
    CHECK(specs[kHpGenes + 1].hi == 8.0);
    CHECK(specs[kHpGenes + 2].lo == 1.0);
    CHECK(specs[kHpGenes + 3].options.size() == 16);
  }

  TEST_CASE("pure-noise genome scores at most 0.05 over 20 seeds") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto d = white_noise_dataset(seed);
      GAConfig cfg;
      const auto out = evaluate(single_feature_genome(3, 0, 3, 1), d, {120, 66}, kPool, cfg, seed);
      CHECK_FALSE(out.degenerate);
      CHECK(out.fitness <= 0.05);
    }
  }

  TEST_CASE("injected-signal genome reaches R2 0.5") {
    SyntheticOptions opt;
    const auto d = injected_signal_dataset(opt);
    const auto pool = augmented_pool(d);
    const auto idx = static_cast<int>(std::find(pool.begin(), pool.end(), opt.signal_name) - pool.begin());
    GAConfig cfg;
    const auto a = evaluate(single_feature_genome(idx, 0, 3, 1), d, {358, 200}, pool, cfg, 9);
    CHECK(a.fitness >= 0.5);
    const auto b = evaluate(single_feature_genome(idx, 0, 3, 1), d, {358, 200}, pool, cfg, 9);
    CHECK(a.fitness == b.fitness);
    CHECK(a.metrics == b.metrics);
  }

  TEST_CASE("failing evaluations return the fitness floor") {
    const auto d = white_noise_dataset(1);
    GAConfig cfg;
    cfg.fitness_floor = -3.0;
    Genome g = single_feature_genome(0, 0, 1, 1);
    g[HpGene::MinChildSamples] = 50;
    const auto out = fit_genome(g, d, {60, 100}, kPool, cfg, 1);
    CHECK(out.outcome.degenerate);
    CHECK(out.outcome.fitness == -3.0);
    CHECK(out.model.trees.empty());
    CHECK(out.predictions.size() == 100);
  }

  TEST_CASE("holdout scores on the end of the training range") {
    const auto d = white_noise_dataset(2);
    GAConfig cfg;
    cfg.holdout = 30;
    const auto g = single_feature_genome(0, 0, 3, 1);
    const auto sel = fit_genome(g, d, {120, 66}, kPool, cfg, 1, ScoreRows::Selection);
    const auto test = fit_genome(g, d, {120, 66}, kPool, cfg, 1, ScoreRows::Test);
    CHECK(sel.scored_y.size() == 30);
    CHECK(test.scored_y.size() == 66);
    CHECK(sel.scored_y.front() == matrix_targets(d, cfg.lookback)[90]);
  }

  TEST_CASE("one generation returns the best initial individual") {
    GAConfig cfg = small_config(4);
    cfg.generations = 1;
    double best = -1e9;
    std::size_t calls = 0;
    const auto r = run_search(cfg, kPool.size(), [&](const Genome& g, std::uint64_t) {
      ++calls;
      const double f = -std::abs(g[HpGene::LearningRate] - 0.05);
      best = std::max(best, f);
      return EvalOutcome{f, {}, false};
    });
    CHECK(calls == cfg.population);
    CHECK(r.evaluations == cfg.population);
    CHECK(r.best_fitness == best);
    CHECK(r.fitness_history.size() == 1);
  }

  TEST_CASE("toy convex fitness converges for 31 seeds") {
    for (std::uint64_t seed = 0; seed < 31; ++seed) {
      GAConfig cfg;
      cfg.seed = seed;
      bool valid = true;
      const auto r = run_search(cfg, kPool.size(), [&](const Genome& g, std::uint64_t) {
        valid = valid && genes_in_range(g, kPool.size()) && decode(g, kPool, true).enabled().size() <= 6;
        const double d = g[HpGene::LearningRate] - 0.05;
        return EvalOutcome{-d * d, {}, false};
      });
      CHECK(valid);
      CHECK(std::abs(r.best_genome[HpGene::LearningRate] - 0.05) <= 0.005);
      CHECK(r.fitness_history.size() == 150);
      CHECK(std::is_sorted(r.fitness_history.begin(), r.fitness_history.end()));
      CHECK(r.best_fitness == r.fitness_history.back());
    }
  }

  TEST_CASE("run_ga is deterministic and records seeds") {
    const auto d = white_noise_dataset(3);
    const auto a = run_ga(d, {120, 66}, small_config(11), kPool);
    const auto b = run_ga(d, {120, 66}, small_config(11), kPool);
    CHECK(a.best_genome == b.best_genome);
    CHECK(a.fitness_history == b.fitness_history);
    CHECK(a.best_eval_seed == b.best_eval_seed);
    CHECK(a.evaluations == b.evaluations);
    const auto replay = evaluate(a.best_genome, d, {120, 66}, kPool, small_config(11), a.best_eval_seed);
    CHECK(replay.fitness == a.best_fitness);
    CHECK(evaluation_seed(1, 0, 0) != evaluation_seed(1, 0, 1));
    CHECK(evaluation_seed(1, 0, 0) != evaluation_seed(1, 1, 0));
  }

  TEST_CASE("GA configuration and input errors") {
    GAConfig cfg = small_config(1);
    cfg.population = 3;
    CHECK(error_of([&] { cfg.validate(); }) == ErrorCode::InvalidConfig);
    cfg = small_config(1);
    cfg.parents_kept = cfg.population;
    CHECK(error_of([&] { cfg.validate(); }) == ErrorCode::InvalidConfig);
    cfg = small_config(1);
    cfg.mutation_rate = 1.0;
    CHECK(error_of([&] { cfg.validate(); }) == ErrorCode::InvalidConfig);
    cfg = small_config(1);
    cfg.lookback = 10;
    CHECK(error_of([&] { cfg.validate(); }) == ErrorCode::InvalidConfig);
    const auto d = white_noise_dataset(4);
    const std::vector<std::string> bad{"Returns", "nope"};
    CHECK(error_of([&] { run_ga(d, {120, 66}, small_config(1), bad); }) == ErrorCode::UnknownSeries);
    CHECK(error_of([&] { run_ga(d, {120, 67}, small_config(1), kPool); }) == ErrorCode::OutOfRange);
  }

  TEST_CASE("optimisation result JSON round-trips") {
    const auto d = white_noise_dataset(5);
    const auto r = run_ga(d, {120, 66}, small_config(2), kPool);
    const auto doc = optim_to_json(r, kPool);
    CHECK(doc["best_genome"]["decoded"]["features"].is_array());
    const auto back = optim_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(back.best_genome == r.best_genome);
    CHECK(back.best_fitness == r.best_fitness);
    CHECK(back.best_metrics == r.best_metrics);
    CHECK(back.fitness_history == r.fitness_history);
    CHECK(back.best_eval_seed == r.best_eval_seed);
    CHECK(optim_to_json(back, kPool) == doc);
  }
}
