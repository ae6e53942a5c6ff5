// Independent reference implementations used to cross-check the library.
// They favour obviousness over speed and share no code with src/.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

// Statistic of a window by function code, written as plain loops.
// Code 0 returns the window itself and -1 returns nothing.
std::vector<double> window_stat(const std::vector<double>& w, int code);

// Linear-interpolation percentile by explicit rank arithmetic.
double percentile(std::vector<double> v, double q);

struct UResult {
  double u = 0.0;
  double p = 1.0;
};

// U for sample a by pair counting; exact two-sided p by enumerating every
// assignment of the pooled values to groups of sizes |a| and |b|.
UResult mann_whitney_exact(const std::vector<double>& a, const std::vector<double>& b);

// R^2 computed directly from its definition.
double r2(const std::vector<double>& y, const std::vector<double>& pred);

// Squared-error gradient boosting with exact greedy splits over raw values.
// Leaf-wise growth, no binning, no sampling. Returns training predictions.
std::vector<double> naive_boost_train(const std::vector<std::vector<double>>& rows,
                                      const std::vector<double>& y, int num_leaves,
                                      int n_estimators, double learning_rate,
                                      int min_child_samples, double reg_lambda);

// Exact histogram counts on [lo, hi] split into `bins` equal-width bins,
// the last bin closed.
std::vector<std::size_t> bin_counts(const std::vector<double>& v, double lo, double hi,
                                    std::size_t bins);

}  // namespace oracle
