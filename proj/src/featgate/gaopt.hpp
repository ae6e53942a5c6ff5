#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "featgate/booster.hpp"
#include "featgate/featwin.hpp"
#include "featgate/ingest.hpp"
#include "featgate/metrics.hpp"
#include "featgate/rng.hpp"

namespace featgate {

inline constexpr std::size_t kHpGenes = 10;
inline constexpr std::size_t kFeatureSlots = kMaxEnabledFeatures;
inline constexpr std::size_t kSlotGenes = 4;
inline constexpr std::size_t kGeneCount = kHpGenes + kFeatureSlots * kSlotGenes;

// Position of each learner gene inside Genome::hp.
enum class HpGene : std::size_t {
  BoostingType,  // index into param_space::kBoostingTypes
  NumLeaves,
  MaxDepth,  // index into param_space::kMaxDepths
  LearningRate,
  Estimators,
  Subsample,
  Colsample,
  MinChildSamples,
  RegAlpha,
  RegLambda,
};

struct FeatureSlot {
  int series = 0;  // index into the active pool
  int w0 = 0;
  int wl = 1;
  int fc = -1;

  friend bool operator==(const FeatureSlot&, const FeatureSlot&) = default;
};

struct Genome {
  std::array<double, kHpGenes> hp{};
  std::array<FeatureSlot, kFeatureSlots> slots{};

  double& operator[](HpGene g) { return hp[static_cast<std::size_t>(g)]; }
  double operator[](HpGene g) const { return hp[static_cast<std::size_t>(g)]; }

  friend bool operator==(const Genome&, const Genome&) = default;
};

enum class GeneKind { Categorical, Integer, Real };

struct GeneSpec {
  GeneKind kind = GeneKind::Real;
  double lo = 0.0;
  double hi = 0.0;
  // Allowed values of a categorical gene.
  std::vector<double> options;

  bool contains(double v) const;
  double clamp(double v) const;
};

// Layout: the 10 learner genes, then (series, w0, wl, fc) for each slot.
std::vector<GeneSpec> gene_specs(std::size_t pool_size);
double get_gene(const Genome& g, std::size_t i);
void set_gene(Genome& g, std::size_t i, double value);

struct DecodedGenome {
  HyperParams params;
  std::array<FeatureSpec, kFeatureSlots> slots;
  // Set when a gene had to be clamped or the all-disabled repair applied.
  bool repaired = false;

  std::vector<FeatureSpec> enabled() const;
};

// Out-of-range genes are clamped and flagged; with strict = true they throw
// OutOfRangeGene instead.
DecodedGenome decode(const Genome& g, std::span<const std::string> pool, bool strict = false);
Genome encode(const DecodedGenome& d, std::span<const std::string> pool);

// Clamps every gene and enables slot 0 as (pool[0], 0, 7, mean) when all
// slots are disabled. Returns true when anything changed.
bool repair(Genome& g, std::size_t pool_size);
bool genes_in_range(const Genome& g, std::size_t pool_size);
Genome random_genome(Rng& rng, std::size_t pool_size);

struct GAConfig {
  std::size_t generations = 150;
  std::size_t population = 24;
  std::size_t parents_kept = 8;
  double mutation_rate = 0.08;
  std::uint64_t seed = 0;
  double fitness_floor = -1.0;
  // Rows carved from the end of the training range for selection; 0 scores
  // candidates on the test rows.
  std::size_t holdout = 0;
  int lookback = kDefaultLookback;
  // Workers for evaluating one generation. 0 = hardware threads.
  std::size_t threads = 1;

  void validate() const;
};

struct EvalOutcome {
  double fitness = 0.0;
  MetricSet metrics;
  bool degenerate = false;
};

using FitnessFn = std::function<EvalOutcome(const Genome& g, std::uint64_t eval_seed)>;

struct OptimResult {
  Genome best_genome;
  double best_fitness = 0.0;
  MetricSet best_metrics;
  std::uint64_t best_eval_seed = 0;
  std::vector<double> fitness_history;
  std::size_t evaluations = 0;
  std::size_t degenerate_evaluations = 0;
};

// Generational elitist GA over genomes for a pool of `pool_size` series.
OptimResult run_search(const GAConfig& cfg, std::size_t pool_size, const FitnessFn& fitness);

// Learner seed of individual `index` in `generation`.
std::uint64_t evaluation_seed(std::uint64_t run_seed, std::size_t generation, std::size_t index);

// A decoded genome trained on the training rows and scored.
struct GenomeFit {
  DecodedGenome decoded;
  BoostedModel model;
  FeatureMatrix scored_x;
  std::vector<double> scored_y;
  std::vector<double> predictions;
  EvalOutcome outcome;
};

enum class ScoreRows { Selection, Test };

// Trains the genome's learner and scores it on the selection rows (holdout
// slice when cfg.holdout > 0, else test) or on the test rows. Failures give
// cfg.fitness_floor with metrics of the training-mean predictor.
GenomeFit fit_genome(const Genome& g, const AlignedDataset& d, const SplitIndices& split,
                     std::span<const std::string> pool, const GAConfig& cfg,
                     std::uint64_t eval_seed, ScoreRows rows = ScoreRows::Selection);

EvalOutcome evaluate(const Genome& g, const AlignedDataset& d, const SplitIndices& split,
                     std::span<const std::string> pool, const GAConfig& cfg,
                     std::uint64_t eval_seed);

OptimResult run_ga(const AlignedDataset& d, const SplitIndices& split, const GAConfig& cfg,
                   std::span<const std::string> pool);

nlohmann::json genome_to_json(const Genome& g, std::span<const std::string> pool);
Genome genome_from_json(const nlohmann::json& doc);
nlohmann::json metrics_to_json(const MetricSet& m);
MetricSet metrics_from_json(const nlohmann::json& doc);
nlohmann::json optim_to_json(const OptimResult& r, std::span<const std::string> pool);
OptimResult optim_from_json(const nlohmann::json& doc);

}  // namespace featgate
