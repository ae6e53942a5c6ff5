#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double rank = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  if (lo == hi) return v[lo];
  return v[lo] * (static_cast<double>(hi) - rank) + v[hi] * (rank - static_cast<double>(lo));
}

std::vector<double> window_stat(const std::vector<double>& w, int code) {
  const std::size_t n = w.size();
  double sum = 0.0;
  double mx = -std::numeric_limits<double>::infinity();
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    sum += w[i];
    if (w[i] > mx) mx = w[i];
    if (w[i] < mn) mn = w[i];
  }
  switch (code) {
    case -1:
      return {};
    case 0:
      return w;
    case 1:
      return {sum / static_cast<double>(n)};
    case 3:
    case 13:
      return {percentile(w, 0.5)};
    case 4:
      return {mx};
    case 5:
      return {mn};
    case 6:
      return {mx - mn};
    case 7:
      return {sum};
    case 8:
      return {w.front()};
    case 9:
      return {w.back()};
    case 10:
      return {w.back() - w.front()};
    case 11:
      return {w.front() == 0.0 ? 0.0 : (w.back() - w.front()) / w.front()};
    case 12:
      return {percentile(w, 0.25)};
    case 14:
      return {percentile(w, 0.75)};
    case 15:
      return {percentile(w, 0.75) - percentile(w, 0.25)};
    default:
      return {std::numeric_limits<double>::quiet_NaN()};
  }
}

namespace {

double u_of(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) u += 1.0;
      else if (x == y) u += 0.5;
    }
  }
  return u;
}

}  // namespace

UResult mann_whitney_exact(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  const std::size_t n1 = a.size();
  const double centre = static_cast<double>(a.size() * b.size()) / 2.0;
  UResult out;
  out.u = u_of(a, b);
  const double observed = std::abs(out.u - centre);
  std::size_t total = 0;
  std::size_t extreme = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != n1) continue;
    std::vector<double> ga;
    std::vector<double> gb;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? ga : gb).push_back(pooled[i]);
    ++total;
    if (std::abs(u_of(ga, gb) - centre) >= observed - 1e-9) ++extreme;
  }
  out.p = static_cast<double>(extreme) / static_cast<double>(total);
  return out;
}

double r2(const std::vector<double>& y, const std::vector<double>& pred) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sse += (y[i] - pred[i]) * (y[i] - pred[i]);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  return 1.0 - sse / sst;
}

namespace {

struct Leaf {
  std::vector<std::size_t> rows;
  bool has_split = false;
  double gain = 0.0;
  std::size_t feature = 0;
  double threshold = 0.0;
};

double score(double g, double h, double lambda) { return g * g / (h + lambda); }

void find_split(Leaf& leaf, const std::vector<std::vector<double>>& x,
                const std::vector<double>& grad, int min_child, double lambda) {
  leaf.has_split = false;
  double g_total = 0.0;
  for (std::size_t r : leaf.rows) g_total += grad[r];
  const double h_total = static_cast<double>(leaf.rows.size());
  const std::size_t nf = x.front().size();
  for (std::size_t f = 0; f < nf; ++f) {
    std::vector<std::size_t> order = leaf.rows;
    std::sort(order.begin(), order.end(),
              [&](std::size_t p, std::size_t q) { return x[p][f] < x[q][f]; });
    double g_left = 0.0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      g_left += grad[order[i]];
      const double v = x[order[i]][f];
      const double next = x[order[i + 1]][f];
      if (v == next) continue;
      const double h_left = static_cast<double>(i + 1);
      const double h_right = h_total - h_left;
      if (h_left < min_child || h_right < min_child) continue;
      const double gain = score(g_left, h_left, lambda) +
                          score(g_total - g_left, h_right, lambda) -
                          score(g_total, h_total, lambda);
      if (gain > 1e-12 && (!leaf.has_split || gain > leaf.gain)) {
        leaf.has_split = true;
        leaf.gain = gain;
        leaf.feature = f;
        leaf.threshold = (v + next) / 2.0;
      }
    }
  }
}

}  // namespace

std::vector<double> naive_boost_train(const std::vector<std::vector<double>>& x,
                                      const std::vector<double>& y, int num_leaves,
                                      int n_estimators, double learning_rate,
                                      int min_child_samples, double reg_lambda) {
  const std::size_t n = y.size();
  double base = 0.0;
  for (double v : y) base += v;
  base /= static_cast<double>(n);
  std::vector<double> pred(n, base);
  for (int it = 0; it < n_estimators; ++it) {
    std::vector<double> grad(n);
    for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - y[i];
    std::vector<Leaf> leaves(1);
    for (std::size_t i = 0; i < n; ++i) leaves[0].rows.push_back(i);
    find_split(leaves[0], x, grad, min_child_samples, reg_lambda);
    while (static_cast<int>(leaves.size()) < num_leaves) {
      std::size_t best = leaves.size();
      for (std::size_t l = 0; l < leaves.size(); ++l) {
        if (leaves[l].has_split && (best == leaves.size() || leaves[l].gain > leaves[best].gain)) best = l;
      }
      if (best == leaves.size()) break;
      Leaf left;
      Leaf right;
      for (std::size_t r : leaves[best].rows) {
        (x[r][leaves[best].feature] <= leaves[best].threshold ? left : right).rows.push_back(r);
      }
      find_split(left, x, grad, min_child_samples, reg_lambda);
      find_split(right, x, grad, min_child_samples, reg_lambda);
      leaves[best] = std::move(left);
      leaves.push_back(std::move(right));
    }
    for (const Leaf& leaf : leaves) {
      double g = 0.0;
      for (std::size_t r : leaf.rows) g += grad[r];
      const double value = -g / (static_cast<double>(leaf.rows.size()) + reg_lambda);
      for (std::size_t r : leaf.rows) pred[r] += learning_rate * value;
    }
  }
  return pred;
}

std::vector<std::size_t> bin_counts(const std::vector<double>& v, double lo, double hi,
                                    std::size_t bins) {
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double x : v) {
    std::size_t b = 0;
    while (b + 1 < bins && x >= lo + width * static_cast<double>(b + 1)) ++b;
    ++counts[b];
  }
  return counts;
}

}  // namespace oracle
