#include "featgate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "featgate/error.hpp"
#include "featgate/parallel.hpp"
#include "featgate/rng.hpp"

namespace featgate {

namespace {

void check_pair(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) {
    fail(ErrorCode::LengthMismatch,
         std::to_string(y_true.size()) + " vs " + std::to_string(y_pred.size()));
  }
  if (y_true.empty()) fail(ErrorCode::LengthMismatch, "empty inputs");
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (!std::isfinite(y_true[i]) || !std::isfinite(y_pred[i])) {
      fail(ErrorCode::NonFiniteInput, "metric inputs must be finite");
    }
  }
}

// Midranks (1-based) of the pooled sample, plus the tie term sum(t^3 - t).
std::vector<double> midranks(std::span<const double> pooled, double* tie_term) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
  std::vector<double> ranks(n);
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    const auto t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  if (tie_term) *tie_term = ties;
  return ranks;
}

// Exact two-sided p: probability under random relabelling that |U - mean| is at
// least the observed deviation. Works on doubled midranks, which are integers.
double exact_p_value(const std::vector<double>& ranks, std::size_t n1, double u_obs) {
  const std::size_t n = ranks.size();
  std::vector<long> doubled(n);
  long total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    doubled[i] = std::lround(2.0 * ranks[i]);
    total += doubled[i];
  }
  // ways[k][s]: number of k-subsets with doubled rank sum s.
  std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = std::min(i + 1, n1); k >= 1; --k) {
      auto& dst = ways[k];
      const auto& src = ways[k - 1];
      for (long s = total; s >= doubled[i]; --s) {
        dst[static_cast<std::size_t>(s)] += src[static_cast<std::size_t>(s - doubled[i])];
      }
    }
  }
  // U = R1 - n1(n1+1)/2, so 2U = S - n1(n1+1) with S the doubled rank sum.
  const auto offset = static_cast<long>(n1 * (n1 + 1));
  const auto n2 = n - n1;
  const long two_mean = static_cast<long>(n1 * n2);  // 2 * (n1 n2 / 2)
  const long obs_dev = std::labs(std::lround(2.0 * u_obs) - two_mean);
  double extreme = 0.0;
  double all = 0.0;
  for (long s = 0; s <= total; ++s) {
    const double w = ways[n1][static_cast<std::size_t>(s)];
    if (w == 0.0) continue;
    all += w;
    if (std::labs(s - offset - two_mean) >= obs_dev) extreme += w;
  }
  return std::min(1.0, extreme / all);
}

double normal_p_value(std::size_t n1, std::size_t n2, double u, double tie_term) {
  const auto dn1 = static_cast<double>(n1);
  const auto dn2 = static_cast<double>(n2);
  const double n = dn1 + dn2;
  const double mean = dn1 * dn2 / 2.0;
  double var = dn1 * dn2 / 12.0 * (n + 1.0);
  if (n > 1.0) var -= dn1 * dn2 / 12.0 * tie_term / (n * (n - 1.0));
  if (!(var > 0.0)) return 1.0;
  const double dev = std::max(0.0, std::abs(u - mean) - 0.5);
  const double z = dev / std::sqrt(var);
  return std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
}

}  // namespace

MetricSet compute_metrics_partial(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred);
  const auto n = static_cast<double>(y_true.size());
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= n;
  double sse = 0.0;
  double sae = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = y_true[i] - y_pred[i];
    sse += e * e;
    sae += std::abs(e);
    sst += (y_true[i] - mean) * (y_true[i] - mean);
  }
  MetricSet m;
  m.r2 = sst > 0.0 ? 1.0 - sse / sst : std::numeric_limits<double>::quiet_NaN();
  m.mae = sae / n;
  m.rmse = std::sqrt(sse / n);
  return m;
}

MetricSet compute_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
  MetricSet m = compute_metrics_partial(y_true, y_pred);
  if (std::isnan(m.r2)) fail(ErrorCode::ConstantTruth, "R^2 undefined for constant truth");
  return m;
}

std::vector<std::size_t> seeded_permutation(std::size_t rows, std::uint64_t seed,
                                            std::size_t column, std::size_t repeat) {
  std::vector<std::size_t> perm(rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed({seed, column, repeat}));
  rng.shuffle(perm);
  return perm;
}

std::vector<PfiEntry> permutation_importance(const BoostedModel& model, const FeatureMatrix& x,
                                             std::span<const double> y, const PfiOptions& options) {
  if (options.repeats < 1) fail(ErrorCode::InvalidArgument, "repeats must be >= 1");
  if (x.rows() == 0) fail(ErrorCode::LengthMismatch, "empty evaluation matrix");
  const double baseline = compute_metrics(y, model.predict(x)).r2;

  std::vector<PfiEntry> entries(x.cols());
  parallel_for(x.cols(), options.threads, [&](std::size_t j) {
    FeatureMatrix permuted = x;
    double total = 0.0;
    for (std::size_t rep = 0; rep < options.repeats; ++rep) {
      const auto perm = options.permutation(x.rows(), options.seed, j, rep);
      for (std::size_t r = 0; r < x.rows(); ++r) {
        permuted.values[r * x.cols() + j] = x.at(perm[r], j);
      }
      total += baseline - compute_metrics(y, model.predict(permuted)).r2;
    }
    entries[j] = {x.column_names[j], j, total / static_cast<double>(options.repeats),
                  options.repeats};
  });
  std::stable_sort(entries.begin(), entries.end(),
                   [](const PfiEntry& a, const PfiEntry& b) { return a.r2_drop > b.r2_drop; });
  return entries;
}

UTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                           UTestMethod method) {
  if (a.empty() || b.empty()) fail(ErrorCode::EmptySample, "both samples must be nonempty");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  for (double v : pooled) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, "U test samples must be finite");
  }
  double tie_term = 0.0;
  const auto ranks = midranks(pooled, &tie_term);
  double r1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
  const auto n1 = static_cast<double>(a.size());

  UTestResult out;
  out.n1 = a.size();
  out.n2 = b.size();
  out.u_statistic = r1 - n1 * (n1 + 1.0) / 2.0;
  const bool exact = method == UTestMethod::Exact ||
                     (method == UTestMethod::Auto && pooled.size() <= kExactLimit);
  out.p_value = exact ? exact_p_value(ranks, a.size(), out.u_statistic)
                      : normal_p_value(out.n1, out.n2, out.u_statistic, tie_term);
  return out;
}

SharedHistogram shared_histogram(std::span<const double> a, std::span<const double> b,
                                 std::size_t bins) {
  if (a.empty() || b.empty()) fail(ErrorCode::EmptySample, "both samples must be nonempty");
  if (bins < 2) fail(ErrorCode::InvalidArgument, "bins must be >= 2");
  SharedHistogram h;
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  h.lo = std::min(*amin, *bmin);
  h.hi = std::max(*amax, *bmax);
  h.counts_a.assign(bins, 0);
  h.counts_b.assign(bins, 0);
  const double width = h.hi - h.lo;
  const auto bin_of = [&](double v) -> std::size_t {
    if (!(width > 0.0)) return 0;
    const double pos = (v - h.lo) / width * static_cast<double>(bins);
    return std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, pos)));
  };
  for (double v : a) ++h.counts_a[bin_of(v)];
  for (double v : b) ++h.counts_b[bin_of(v)];
  return h;
}

double histogram_overlap(std::span<const double> a, std::span<const double> b, std::size_t bins) {
  const SharedHistogram h = shared_histogram(a, b, bins);
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  double overlap = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    overlap += std::min(static_cast<double>(h.counts_a[i]) / na,
                        static_cast<double>(h.counts_b[i]) / nb);
  }
  return std::clamp(overlap, 0.0, 1.0);
}

}  // namespace featgate
