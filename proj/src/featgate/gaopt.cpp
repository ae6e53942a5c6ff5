#include "featgate/gaopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "featgate/error.hpp"
#include "featgate/parallel.hpp"

namespace featgate {

namespace {

constexpr std::size_t kSeriesGene = 0;
constexpr std::size_t kW0Gene = 1;
constexpr std::size_t kWlGene = 2;
constexpr std::size_t kFcGene = 3;

GeneSpec categorical(std::vector<double> options) {
  GeneSpec s;
  s.kind = GeneKind::Categorical;
  s.lo = options.front();
  s.hi = options.back();
  s.options = std::move(options);
  return s;
}

GeneSpec index_gene(std::size_t count) {
  std::vector<double> options(count);
  std::iota(options.begin(), options.end(), 0.0);
  return categorical(std::move(options));
}

GeneSpec integer(ParamRange r) { return {GeneKind::Integer, r.lo, r.hi, {}}; }
GeneSpec real(ParamRange r) { return {GeneKind::Real, r.lo, r.hi, {}}; }

double to_json_number(double v) { return v; }

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_from(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

MetricSet mean_predictor_metrics(std::span<const double> y_train, std::span<const double> y_eval,
                                 std::vector<double>* predictions) {
  MetricSet m{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
              std::numeric_limits<double>::quiet_NaN()};
  if (y_train.empty() || y_eval.empty()) return m;
  double mean = 0.0;
  for (double v : y_train) mean += v;
  mean /= static_cast<double>(y_train.size());
  std::vector<double> pred(y_eval.size(), mean);
  try {
    m = compute_metrics_partial(y_eval, pred);
  } catch (const Error&) {
  }
  if (predictions) *predictions = std::move(pred);
  return m;
}

}  // namespace

bool GeneSpec::contains(double v) const {
  if (!std::isfinite(v)) return false;
  switch (kind) {
    case GeneKind::Categorical:
      return std::find(options.begin(), options.end(), v) != options.end();
    case GeneKind::Integer:
      return v >= lo && v <= hi && v == std::round(v);
    case GeneKind::Real:
      return v >= lo && v <= hi;
  }
  return false;
}

double GeneSpec::clamp(double v) const {
  if (!std::isfinite(v)) v = lo;
  switch (kind) {
    case GeneKind::Categorical: {
      // Nearest allowed value; ties go to the smaller option.
      double best = options.front();
      for (double o : options) {
        if (std::abs(o - v) < std::abs(best - v)) best = o;
      }
      return best;
    }
    case GeneKind::Integer:
      return std::clamp(std::round(v), lo, hi);
    case GeneKind::Real:
      return std::clamp(v, lo, hi);
  }
  return v;
}

std::vector<GeneSpec> gene_specs(std::size_t pool_size) {
  namespace ps = param_space;
  if (pool_size == 0) fail(ErrorCode::InvalidArgument, "empty series pool");
  std::vector<GeneSpec> specs;
  specs.reserve(kGeneCount);
  specs.push_back(index_gene(ps::kBoostingTypes.size()));
  specs.push_back(integer(ps::kNumLeaves));
  specs.push_back(index_gene(ps::kMaxDepths.size()));
  specs.push_back(real(ps::kLearningRate));
  specs.push_back(integer(ps::kEstimators));
  specs.push_back(real(ps::kSubsample));
  specs.push_back(real(ps::kColsample));
  specs.push_back(integer(ps::kMinChildSamples));
  specs.push_back(real(ps::kRegAlpha));
  specs.push_back(real(ps::kRegLambda));
  std::vector<double> fc_options;
  for (FunctionCode fc : all_function_codes()) fc_options.push_back(static_cast<int>(fc));
  for (std::size_t s = 0; s < kFeatureSlots; ++s) {
    specs.push_back(index_gene(pool_size));
    specs.push_back(integer({0, kMaxOffset}));
    specs.push_back(integer({1, kMaxWindowLength}));
    specs.push_back(categorical(fc_options));
  }
  return specs;
}

double get_gene(const Genome& g, std::size_t i) {
  if (i < kHpGenes) return g.hp[i];
  const std::size_t k = i - kHpGenes;
  const FeatureSlot& slot = g.slots.at(k / kSlotGenes);
  switch (k % kSlotGenes) {
    case kSeriesGene: return slot.series;
    case kW0Gene: return slot.w0;
    case kWlGene: return slot.wl;
    default: return slot.fc;
  }
}

void set_gene(Genome& g, std::size_t i, double value) {
  if (i < kHpGenes) {
    g.hp[i] = value;
    return;
  }
  const std::size_t k = i - kHpGenes;
  FeatureSlot& slot = g.slots.at(k / kSlotGenes);
  const int v = static_cast<int>(std::lround(value));
  switch (k % kSlotGenes) {
    case kSeriesGene: slot.series = v; break;
    case kW0Gene: slot.w0 = v; break;
    case kWlGene: slot.wl = v; break;
    default: slot.fc = v; break;
  }
}

std::vector<FeatureSpec> DecodedGenome::enabled() const {
  std::vector<FeatureSpec> out;
  for (const auto& s : slots) {
    if (s.enabled()) out.push_back(s);
  }
  return out;
}

bool genes_in_range(const Genome& g, std::size_t pool_size) {
  const auto specs = gene_specs(pool_size);
  for (std::size_t i = 0; i < kGeneCount; ++i) {
    if (!specs[i].contains(get_gene(g, i))) return false;
  }
  return true;
}

bool repair(Genome& g, std::size_t pool_size) {
  const auto specs = gene_specs(pool_size);
  bool changed = false;
  for (std::size_t i = 0; i < kGeneCount; ++i) {
    const double v = get_gene(g, i);
    if (!specs[i].contains(v)) {
      set_gene(g, i, specs[i].clamp(v));
      changed = true;
    }
  }
  const bool any_enabled = std::any_of(g.slots.begin(), g.slots.end(),
                                       [](const FeatureSlot& s) { return s.fc != -1; });
  if (!any_enabled) {
    g.slots[0] = {0, 0, 7, static_cast<int>(FunctionCode::Mean)};
    changed = true;
  }
  return changed;
}

DecodedGenome decode(const Genome& genome, std::span<const std::string> pool, bool strict) {
  namespace ps = param_space;
  Genome g = genome;
  const auto specs = gene_specs(pool.size());
  if (strict) {
    for (std::size_t i = 0; i < kGeneCount; ++i) {
      if (!specs[i].contains(get_gene(g, i))) {
        fail(ErrorCode::OutOfRangeGene, "gene " + std::to_string(i) + " = " +
                                            std::to_string(get_gene(g, i)));
      }
    }
  }
  DecodedGenome out;
  out.repaired = repair(g, pool.size());

  HyperParams& hp = out.params;
  hp.boosting_type = ps::kBoostingTypes[static_cast<std::size_t>(g[HpGene::BoostingType])];
  hp.num_leaves = static_cast<int>(g[HpGene::NumLeaves]);
  hp.max_depth = ps::kMaxDepths[static_cast<std::size_t>(g[HpGene::MaxDepth])];
  hp.learning_rate = g[HpGene::LearningRate];
  hp.n_estimators = static_cast<int>(g[HpGene::Estimators]);
  hp.subsample = g[HpGene::Subsample];
  hp.colsample_bytree = g[HpGene::Colsample];
  hp.min_child_samples = static_cast<int>(g[HpGene::MinChildSamples]);
  hp.reg_alpha = g[HpGene::RegAlpha];
  hp.reg_lambda = g[HpGene::RegLambda];

  for (std::size_t s = 0; s < kFeatureSlots; ++s) {
    const FeatureSlot& slot = g.slots[s];
    out.slots[s] = FeatureSpec{pool[static_cast<std::size_t>(slot.series)], slot.w0, slot.wl,
                               function_code_from_int(slot.fc)};
  }
  return out;
}

Genome encode(const DecodedGenome& d, std::span<const std::string> pool) {
  namespace ps = param_space;
  const auto index_in = [](const auto& options, auto value) {
    const auto it = std::find(options.begin(), options.end(), value);
    if (it == options.end()) fail(ErrorCode::OutOfRangeGene, "value outside option list");
    return static_cast<double>(it - options.begin());
  };
  Genome g;
  const HyperParams& hp = d.params;
  g[HpGene::BoostingType] = index_in(ps::kBoostingTypes, hp.boosting_type);
  g[HpGene::NumLeaves] = hp.num_leaves;
  g[HpGene::MaxDepth] = index_in(ps::kMaxDepths, hp.max_depth);
  g[HpGene::LearningRate] = hp.learning_rate;
  g[HpGene::Estimators] = hp.n_estimators;
  g[HpGene::Subsample] = hp.subsample;
  g[HpGene::Colsample] = hp.colsample_bytree;
  g[HpGene::MinChildSamples] = hp.min_child_samples;
  g[HpGene::RegAlpha] = hp.reg_alpha;
  g[HpGene::RegLambda] = hp.reg_lambda;
  for (std::size_t s = 0; s < kFeatureSlots; ++s) {
    const FeatureSpec& spec = d.slots[s];
    const auto it = std::find(pool.begin(), pool.end(), spec.series);
    if (it == pool.end()) fail(ErrorCode::UnknownSeries, spec.series);
    g.slots[s] = {static_cast<int>(it - pool.begin()), spec.w0, spec.wl, static_cast<int>(spec.fc)};
  }
  return g;
}

Genome random_genome(Rng& rng, std::size_t pool_size) {
  const auto specs = gene_specs(pool_size);
  Genome g;
  for (std::size_t i = 0; i < kGeneCount; ++i) {
    const GeneSpec& s = specs[i];
    double v = 0.0;
    switch (s.kind) {
      case GeneKind::Categorical:
        v = s.options[static_cast<std::size_t>(rng.below(s.options.size()))];
        break;
      case GeneKind::Integer:
        v = s.lo + static_cast<double>(rng.below(static_cast<std::uint64_t>(s.hi - s.lo) + 1));
        break;
      case GeneKind::Real:
        v = rng.uniform(s.lo, s.hi);
        break;
    }
    set_gene(g, i, v);
  }
  repair(g, pool_size);
  return g;
}

void GAConfig::validate() const {
  const auto bad = [](const std::string& what) { fail(ErrorCode::InvalidConfig, what); };
  if (generations < 1) bad("generations must be >= 1");
  if (population < 4) bad("population must be >= 4");
  if (parents_kept < 1 || parents_kept >= population) bad("parents_kept must be in [1, population)");
  if (!(mutation_rate > 0.0 && mutation_rate < 1.0)) bad("mutation_rate must be in (0, 1)");
  if (!std::isfinite(fitness_floor)) bad("fitness_floor must be finite");
  if (lookback < kMaxOffset + kMaxWindowLength - 1) {
    bad("lookback must cover the deepest window (" +
        std::to_string(kMaxOffset + kMaxWindowLength - 1) + ")");
  }
}

std::uint64_t evaluation_seed(std::uint64_t run_seed, std::size_t generation, std::size_t index) {
  return derive_seed({run_seed, 0x65766131ULL, generation, index});
}

OptimResult run_search(const GAConfig& cfg, std::size_t pool_size, const FitnessFn& fitness) {
  cfg.validate();
  const auto specs = gene_specs(pool_size);

  struct Individual {
    Genome genome;
    EvalOutcome outcome;
    std::uint64_t seed = 0;
  };
  OptimResult result;

  const auto evaluate_all = [&](std::vector<Individual>& people, std::size_t first,
                                std::size_t generation) {
    for (std::size_t i = first; i < people.size(); ++i) {
      if (!genes_in_range(people[i].genome, pool_size)) {
        throw std::logic_error("GA produced an out-of-range genome");
      }
      people[i].seed = evaluation_seed(cfg.seed, generation, i);
    }
    parallel_for(people.size() - first, cfg.threads, [&](std::size_t k) {
      Individual& ind = people[first + k];
      ind.outcome = fitness(ind.genome, ind.seed);
      if (!std::isfinite(ind.outcome.fitness)) {
        ind.outcome.fitness = cfg.fitness_floor;
        ind.outcome.degenerate = true;
      }
    });
    for (std::size_t i = first; i < people.size(); ++i) {
      ++result.evaluations;
      if (people[i].outcome.degenerate) ++result.degenerate_evaluations;
    }
  };

  // Best first; equal fitness keeps population order.
  const auto rank = [](const std::vector<Individual>& people) {
    std::vector<std::size_t> order(people.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return people[a].outcome.fitness > people[b].outcome.fitness;
    });
    return order;
  };

  std::vector<Individual> population(cfg.population);
  {
    Rng init(derive_seed({cfg.seed, 0x696e6974ULL}));
    for (auto& ind : population) ind.genome = random_genome(init, pool_size);
  }
  evaluate_all(population, 0, 0);

  Individual best = population[rank(population).front()];
  result.fitness_history.push_back(best.outcome.fitness);

  for (std::size_t gen = 1; gen < cfg.generations; ++gen) {
    const auto order = rank(population);
    std::vector<Individual> next;
    next.reserve(cfg.population);
    for (std::size_t i = 0; i < cfg.parents_kept; ++i) next.push_back(population[order[i]]);

    Rng rng(derive_seed({cfg.seed, 0x67656eULL, gen}));
    while (next.size() < cfg.population) {
      const Genome& a = next[static_cast<std::size_t>(rng.below(cfg.parents_kept))].genome;
      const Genome& b = next[static_cast<std::size_t>(rng.below(cfg.parents_kept))].genome;
      Individual child;
      for (std::size_t i = 0; i < kGeneCount; ++i) {
        double v = rng.bernoulli(0.5) ? get_gene(a, i) : get_gene(b, i);
        if (rng.bernoulli(cfg.mutation_rate)) {
          const GeneSpec& s = specs[i];
          switch (s.kind) {
            case GeneKind::Categorical:
              v = s.options[static_cast<std::size_t>(rng.below(s.options.size()))];
              break;
            case GeneKind::Integer:
            case GeneKind::Real:
              v = s.clamp(v + 0.1 * (s.hi - s.lo) * rng.normal());
              break;
          }
        }
        set_gene(child.genome, i, v);
      }
      repair(child.genome, pool_size);
      next.push_back(std::move(child));
    }
    evaluate_all(next, cfg.parents_kept, gen);
    population = std::move(next);

    const Individual& leader = population[rank(population).front()];
    if (leader.outcome.fitness > best.outcome.fitness) best = leader;
    result.fitness_history.push_back(best.outcome.fitness);
  }

  result.best_genome = best.genome;
  result.best_fitness = best.outcome.fitness;
  result.best_metrics = best.outcome.metrics;
  result.best_eval_seed = best.seed;
  return result;
}

GenomeFit fit_genome(const Genome& g, const AlignedDataset& d, const SplitIndices& split,
                     std::span<const std::string> pool, const GAConfig& cfg,
                     std::uint64_t eval_seed, ScoreRows rows) {
  GenomeFit out;
  out.decoded = decode(g, pool);
  const auto specs = out.decoded.enabled();
  if (specs.size() > kMaxEnabledFeatures) {
    throw std::logic_error("genome decodes to more than six features");
  }

  const bool use_holdout = rows == ScoreRows::Selection && cfg.holdout > 0;
  std::vector<double> y_all;
  std::vector<double> y_train;
  try {
    const FeatureMatrix x = build_matrix(d, specs, cfg.lookback);
    y_all = matrix_targets(d, cfg.lookback);
    if (split.train_end + split.test_len > x.rows()) {
      fail(ErrorCode::OutOfRange, "split exceeds feature rows");
    }
    std::size_t fit_end = split.train_end;
    std::size_t score_begin = split.train_end;
    std::size_t score_end = split.train_end + split.test_len;
    if (use_holdout) {
      if (cfg.holdout >= split.train_end) fail(ErrorCode::OutOfRange, "holdout >= training rows");
      fit_end = split.train_end - cfg.holdout;
      score_begin = fit_end;
      score_end = split.train_end;
    }
    y_train.assign(y_all.begin(), y_all.begin() + static_cast<std::ptrdiff_t>(fit_end));
    out.scored_x = x.slice_rows(score_begin, score_end);
    out.scored_y.assign(y_all.begin() + static_cast<std::ptrdiff_t>(score_begin),
                        y_all.begin() + static_cast<std::ptrdiff_t>(score_end));
    const FeatureMatrix x_train = x.slice_rows(0, fit_end);
    FitOptions fit_options;
    out.model = fit(x_train, y_train, out.decoded.params, eval_seed, fit_options);
    out.predictions = out.model.predict(out.scored_x);
    out.outcome.metrics = compute_metrics(out.scored_y, out.predictions);
    out.outcome.fitness = out.outcome.metrics.r2;
  } catch (const Error&) {
    // Degenerate: zero-tree model at the training mean.
    out.outcome.degenerate = true;
    out.outcome.fitness = cfg.fitness_floor;
    out.model = BoostedModel{};
    out.model.params = out.decoded.params;
    out.model.feature_names = out.scored_x.column_names;
    if (!y_train.empty()) {
      double mean = 0.0;
      for (double v : y_train) mean += v;
      out.model.base_score = mean / static_cast<double>(y_train.size());
    }
    out.outcome.metrics = mean_predictor_metrics(y_train, out.scored_y, &out.predictions);
  }
  return out;
}

EvalOutcome evaluate(const Genome& g, const AlignedDataset& d, const SplitIndices& split,
                     std::span<const std::string> pool, const GAConfig& cfg,
                     std::uint64_t eval_seed) {
  return fit_genome(g, d, split, pool, cfg, eval_seed, ScoreRows::Selection).outcome;
}

OptimResult run_ga(const AlignedDataset& d, const SplitIndices& split, const GAConfig& cfg,
                   std::span<const std::string> pool) {
  cfg.validate();
  for (const auto& name : pool) {
    if (!d.index_of(name)) fail(ErrorCode::UnknownSeries, name);
  }
  const std::size_t usable = d.rows() > static_cast<std::size_t>(cfg.lookback)
                                 ? d.rows() - static_cast<std::size_t>(cfg.lookback)
                                 : 0;
  chronological_split(usable, split.train_end, split.test_len);
  if (cfg.holdout >= split.train_end) fail(ErrorCode::InvalidConfig, "holdout >= training rows");
  return run_search(cfg, pool.size(), [&](const Genome& g, std::uint64_t seed) {
    return evaluate(g, d, split, pool, cfg, seed);
  });
}

nlohmann::json genome_to_json(const Genome& g, std::span<const std::string> pool) {
  nlohmann::json raw_hp = nlohmann::json::array();
  for (double v : g.hp) raw_hp.push_back(to_json_number(v));
  nlohmann::json raw_slots = nlohmann::json::array();
  for (const auto& s : g.slots) raw_slots.push_back({s.series, s.w0, s.wl, s.fc});
  const DecodedGenome d = decode(g, pool);
  nlohmann::json features = nlohmann::json::array();
  for (const auto& spec : d.enabled()) {
    features.push_back({{"spec", spec.compact()},
                        {"name", spec.feature_name()},
                        {"columns", spec.column_names()}});
  }
  return {
      {"raw", {{"hp", raw_hp}, {"slots", raw_slots}}},
      {"decoded", {{"params", params_to_json(d.params)}, {"features", features}}},
  };
}

Genome genome_from_json(const nlohmann::json& doc) {
  Genome g;
  const auto& raw = doc.at("raw");
  const auto hp = raw.at("hp").get<std::vector<double>>();
  const auto slots = raw.at("slots").get<std::vector<std::array<int, 4>>>();
  if (hp.size() != kHpGenes || slots.size() != kFeatureSlots) {
    fail(ErrorCode::InvalidArgument, "genome has the wrong gene count");
  }
  std::copy(hp.begin(), hp.end(), g.hp.begin());
  for (std::size_t s = 0; s < kFeatureSlots; ++s) {
    g.slots[s] = {slots[s][0], slots[s][1], slots[s][2], slots[s][3]};
  }
  return g;
}

nlohmann::json metrics_to_json(const MetricSet& m) {
  return {{"r2", number_or_null(m.r2)}, {"mae", number_or_null(m.mae)}, {"rmse", number_or_null(m.rmse)}};
}

MetricSet metrics_from_json(const nlohmann::json& doc) {
  return {number_from(doc.at("r2")), number_from(doc.at("mae")), number_from(doc.at("rmse"))};
}

nlohmann::json optim_to_json(const OptimResult& r, std::span<const std::string> pool) {
  nlohmann::json history = nlohmann::json::array();
  for (double v : r.fitness_history) history.push_back(number_or_null(v));
  return {
      {"best_genome", genome_to_json(r.best_genome, pool)},
      {"best_fitness", number_or_null(r.best_fitness)},
      {"best_metrics", metrics_to_json(r.best_metrics)},
      {"best_eval_seed", r.best_eval_seed},
      {"fitness_history", history},
      {"evaluations", r.evaluations},
      {"degenerate_evaluations", r.degenerate_evaluations},
  };
}

OptimResult optim_from_json(const nlohmann::json& doc) {
  OptimResult r;
  r.best_genome = genome_from_json(doc.at("best_genome"));
  r.best_fitness = number_from(doc.at("best_fitness"));
  r.best_metrics = metrics_from_json(doc.at("best_metrics"));
  r.best_eval_seed = doc.at("best_eval_seed").get<std::uint64_t>();
  for (const auto& v : doc.at("fitness_history")) r.fitness_history.push_back(number_from(v));
  r.evaluations = doc.at("evaluations").get<std::size_t>();
  r.degenerate_evaluations = doc.at("degenerate_evaluations").get<std::size_t>();
  return r;
}

}  // namespace featgate
