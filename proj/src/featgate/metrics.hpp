#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "featgate/booster.hpp"
#include "featgate/featwin.hpp"

namespace featgate {

struct MetricSet {
  double r2 = 0.0;
  double mae = 0.0;
  double rmse = 0.0;

  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

// Throws ConstantTruth when the truth has zero variance.
MetricSet compute_metrics(std::span<const double> y_true, std::span<const double> y_pred);

// MAE and RMSE only; r2 is NaN when it is undefined.
MetricSet compute_metrics_partial(std::span<const double> y_true, std::span<const double> y_pred);

struct PfiEntry {
  std::string feature;
  std::size_t column = 0;
  double r2_drop = 0.0;
  std::size_t repeats = 0;

  friend bool operator==(const PfiEntry&, const PfiEntry&) = default;
};

// Produces the row permutation for (column, repeat); the default shuffles
// with a stream seeded by (seed, column, repeat).
using PermutationSource =
    std::function<std::vector<std::size_t>(std::size_t rows, std::uint64_t seed,
                                           std::size_t column, std::size_t repeat)>;

std::vector<std::size_t> seeded_permutation(std::size_t rows, std::uint64_t seed,
                                            std::size_t column, std::size_t repeat);

struct PfiOptions {
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  PermutationSource permutation = seeded_permutation;
};

// Mean R^2 drop per column, sorted by drop descending (stable on column).
std::vector<PfiEntry> permutation_importance(const BoostedModel& model, const FeatureMatrix& x,
                                             std::span<const double> y,
                                             const PfiOptions& options = {});

struct UTestResult {
  double u_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  friend bool operator==(const UTestResult&, const UTestResult&) = default;
};

enum class UTestMethod {
  // Exact permutation distribution when n1 + n2 <= kExactLimit, otherwise normal.
  Auto,
  Exact,
  Normal,
};

inline constexpr std::size_t kExactLimit = 16;

// Two-sided Mann-Whitney U; U is reported for the first sample. Ties get
// midranks; the normal path uses the tie-corrected variance and a 0.5
// continuity correction.
UTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                           UTestMethod method = UTestMethod::Auto);

// Sum over shared equal-width bins of min(per-bin proportion of a, of b).
double histogram_overlap(std::span<const double> a, std::span<const double> b,
                         std::size_t bins = 10);

// Per-bin counts on the shared edges used by histogram_overlap.
struct SharedHistogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts_a;
  std::vector<std::size_t> counts_b;
};
SharedHistogram shared_histogram(std::span<const double> a, std::span<const double> b,
                                 std::size_t bins = 10);

}  // namespace featgate
