#include "featgate/booster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "featgate/error.hpp"
#include "featgate/parallel.hpp"
#include "featgate/rng.hpp"

namespace featgate {

namespace {

constexpr int kModelFormatVersion = 1;

double threshold_l1(double g, double alpha) {
  const double mag = std::abs(g) - alpha;
  if (mag <= 0.0) return 0.0;
  return g > 0.0 ? mag : -mag;
}

double leaf_value(double g, double h, const HyperParams& hp) {
  return -threshold_l1(g, hp.reg_alpha) / (h + hp.reg_lambda);
}

double leaf_score(double g, double h, const HyperParams& hp) {
  const double t = threshold_l1(g, hp.reg_alpha);
  return t * t / (h + hp.reg_lambda);
}

// Feature-major binned view of the training rows.
struct BinnedData {
  std::size_t rows = 0;
  std::vector<std::vector<double>> thresholds;
  std::vector<std::vector<std::uint8_t>> bins;  // [feature][row]
};

BinnedData bin_features(const std::vector<std::vector<double>>& columns) {
  BinnedData b;
  b.rows = columns.empty() ? 0 : columns.front().size();
  b.thresholds.reserve(columns.size());
  b.bins.reserve(columns.size());
  for (const auto& col : columns) {
    auto th = bin_thresholds(col);
    std::vector<std::uint8_t> idx(col.size());
    for (std::size_t r = 0; r < col.size(); ++r) {
      idx[r] = static_cast<std::uint8_t>(std::lower_bound(th.begin(), th.end(), col[r]) - th.begin());
    }
    b.thresholds.push_back(std::move(th));
    b.bins.push_back(std::move(idx));
  }
  return b;
}

struct HistBin {
  double g = 0.0;
  double h = 0.0;
  std::size_t count = 0;
};

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  int bin = -1;  // rows with bin <= this go left
};

struct Leaf {
  std::vector<std::size_t> rows;  // positions into the sampled row list
  double g = 0.0;
  double h = 0.0;
  int depth = 0;
  int node = 0;
  SplitChoice best;
};

class TreeGrower {
 public:
  TreeGrower(const BinnedData& data, const HyperParams& hp, const FitOptions& options,
             std::span<const std::size_t> sample_rows, std::span<const double> grad,
             std::span<const double> hess, std::span<const int> features)
      : data_(data), hp_(hp), options_(options), sample_rows_(sample_rows), grad_(grad),
        hess_(hess), features_(features) {}

  Tree grow() {
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<Leaf> leaves;
    Leaf root;
    root.rows.resize(sample_rows_.size());
    std::iota(root.rows.begin(), root.rows.end(), std::size_t{0});
    for (std::size_t i : root.rows) {
      root.g += grad_[i];
      root.h += hess_[i];
    }
    root.best = find_split(root);
    leaves.push_back(std::move(root));

    while (static_cast<int>(leaves.size()) < hp_.num_leaves) {
      std::size_t pick = leaves.size();
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].best.feature < 0) continue;
        if (pick == leaves.size() || leaves[i].best.gain > leaves[pick].best.gain) pick = i;
      }
      if (pick == leaves.size()) break;

      Leaf parent = std::move(leaves[pick]);
      const auto f = static_cast<std::size_t>(parent.best.feature);
      const auto& fbins = data_.bins[f];
      Leaf left;
      Leaf right;
      for (std::size_t i : parent.rows) {
        Leaf& side = fbins[sample_rows_[i]] <= parent.best.bin ? left : right;
        side.rows.push_back(i);
        side.g += grad_[i];
        side.h += hess_[i];
      }
      left.depth = right.depth = parent.depth + 1;
      left.node = static_cast<int>(tree.nodes.size());
      right.node = left.node + 1;
      TreeNode& split = tree.nodes[static_cast<std::size_t>(parent.node)];
      split.feature = parent.best.feature;
      split.threshold = data_.thresholds[f][static_cast<std::size_t>(parent.best.bin)];
      split.left = left.node;
      split.right = right.node;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      left.best = find_split(left);
      right.best = find_split(right);
      leaves[pick] = std::move(left);
      leaves.insert(leaves.begin() + static_cast<std::ptrdiff_t>(pick) + 1, std::move(right));
    }

    for (const Leaf& leaf : leaves) {
      tree.nodes[static_cast<std::size_t>(leaf.node)].value = leaf_value(leaf.g, leaf.h, hp_);
    }
    return tree;
  }

 private:
  SplitChoice find_split(const Leaf& leaf) const {
    SplitChoice none;
    const auto min_child = static_cast<std::size_t>(hp_.min_child_samples);
    if (hp_.max_depth > 0 && leaf.depth >= hp_.max_depth) return none;
    if (leaf.rows.size() < 2 * min_child) return none;

    std::vector<SplitChoice> per_feature(features_.size());
    const auto scan = [&](std::size_t k) {
      const auto f = static_cast<std::size_t>(features_[k]);
      const std::size_t nbins = data_.thresholds[f].size() + 1;
      if (nbins < 2) return;
      std::vector<HistBin> hist(nbins);
      const auto& fbins = data_.bins[f];
      for (std::size_t i : leaf.rows) {
        HistBin& b = hist[fbins[sample_rows_[i]]];
        b.g += grad_[i];
        b.h += hess_[i];
        ++b.count;
      }
      const double parent_score = leaf_score(leaf.g, leaf.h, hp_);
      HistBin acc;
      SplitChoice best;
      for (std::size_t b = 0; b + 1 < nbins; ++b) {
        acc.g += hist[b].g;
        acc.h += hist[b].h;
        acc.count += hist[b].count;
        if (acc.count < min_child) continue;
        const std::size_t right_count = leaf.rows.size() - acc.count;
        if (right_count < min_child) break;
        const double gr = leaf.g - acc.g;
        const double hr = leaf.h - acc.h;
        const double gain = leaf_score(acc.g, acc.h, hp_) + leaf_score(gr, hr, hp_) - parent_score;
        if (gain > best.gain) best = {gain, static_cast<int>(f), static_cast<int>(b)};
      }
      per_feature[k] = best;
    };
    const bool parallel = options_.threads != 1 &&
                          leaf.rows.size() * features_.size() >= options_.parallel_min_work;
    parallel_for(features_.size(), parallel ? options_.threads : 1, scan);

    // Reduce in feature order: ties keep the lowest feature, then lowest bin.
    SplitChoice best;
    for (const auto& c : per_feature) {
      if (c.feature >= 0 && c.gain > best.gain) best = c;
    }
    return best;
  }

  const BinnedData& data_;
  const HyperParams& hp_;
  const FitOptions& options_;
  std::span<const std::size_t> sample_rows_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  std::span<const int> features_;
};

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorCode::NonFiniteInput, what);
  }
}

std::size_t ceil_fraction(double rate, std::size_t n) {
  const auto k = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-12));
  return std::clamp<std::size_t>(k, 1, n);
}

}  // namespace

std::string_view to_string(BoostingType type) {
  switch (type) {
    case BoostingType::Gbdt: return "gbdt";
    case BoostingType::Dart: return "dart";
    case BoostingType::Goss: return "goss";
  }
  return "gbdt";
}

std::optional<BoostingType> parse_boosting_type(std::string_view text) {
  for (BoostingType t : param_space::kBoostingTypes) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

void HyperParams::validate() const {
  const auto bad = [](const std::string& what) { fail(ErrorCode::InvalidArgument, what); };
  if (num_leaves < 1) bad("num_leaves must be >= 1");
  if (max_depth != -1 && max_depth < 1) bad("max_depth must be -1 or >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be > 0");
  if (n_estimators < 0) bad("n_estimators must be >= 0");
  if (!(subsample > 0.0 && subsample <= 1.0)) bad("subsample must be in (0, 1]");
  if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0)) bad("colsample_bytree must be in (0, 1]");
  if (min_child_samples < 1) bad("min_child_samples must be >= 1");
  if (!(reg_alpha >= 0.0) || !std::isfinite(reg_alpha)) bad("reg_alpha must be >= 0");
  if (!(reg_lambda >= 0.0) || !std::isfinite(reg_lambda)) bad("reg_lambda must be >= 0");
}

bool HyperParams::in_search_space() const {
  namespace ps = param_space;
  const auto in = [](double v, ParamRange r) { return v >= r.lo && v <= r.hi; };
  return std::find(ps::kMaxDepths.begin(), ps::kMaxDepths.end(), max_depth) != ps::kMaxDepths.end() &&
         in(num_leaves, ps::kNumLeaves) && in(learning_rate, ps::kLearningRate) &&
         in(n_estimators, ps::kEstimators) && in(subsample, ps::kSubsample) &&
         in(colsample_bytree, ps::kColsample) && in(min_child_samples, ps::kMinChildSamples) &&
         in(reg_alpha, ps::kRegAlpha) && in(reg_lambda, ps::kRegLambda);
}

double Tree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                          : n.right);
  }
  return nodes[i].value;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) {
      deepest = std::max(deepest, depth[i]);
      continue;
    }
    depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
    depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
  }
  return deepest;
}

double BoostedModel::predict_row(std::span<const double> row) const {
  double out = base_score;
  for (std::size_t t = 0; t < trees.size(); ++t) out += tree_weights[t] * trees[t].predict(row);
  return out;
}

std::vector<double> BoostedModel::predict(const FeatureMatrix& x) const {
  if (x.cols() != feature_names.size()) {
    fail(ErrorCode::ShapeMismatch, "model expects " + std::to_string(feature_names.size()) +
                                       " columns, got " + std::to_string(x.cols()));
  }
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_row(x.row(r));
  return out;
}

std::vector<double> predict(const BoostedModel& model, const FeatureMatrix& x) {
  return model.predict(x);
}

std::vector<double> bin_thresholds(std::span<const double> values, std::size_t max_bins) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct;
  for (double v : sorted) {
    if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
  }
  const auto midpoint = [](double a, double b) {
    const double m = a + (b - a) / 2.0;
    return m >= b ? a : m;
  };

  std::vector<double> th;
  if (distinct.size() <= max_bins) {
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) th.push_back(midpoint(distinct[i], distinct[i + 1]));
    return th;
  }
  const std::size_t n = sorted.size();
  for (std::size_t k = 1; k < max_bins; ++k) {
    const std::size_t pos = (k * n + max_bins - 1) / max_bins - 1;
    const double v = sorted[pos];
    const auto next = std::upper_bound(distinct.begin(), distinct.end(), v);
    if (next == distinct.end()) break;
    const double t = midpoint(v, *next);
    if (th.empty() || t > th.back()) th.push_back(t);
  }
  return th;
}

GossSample sample_rows_goss(std::span<const double> gradients, double top_rate,
                            double other_rate, std::uint64_t seed) {
  if (!(top_rate > 0.0) || !(other_rate > 0.0) || top_rate + other_rate > 1.0 + 1e-12) {
    fail(ErrorCode::InvalidRates, "need 0 < top_rate, other_rate and top_rate + other_rate <= 1");
  }
  const std::size_t n = gradients.size();
  GossSample out;
  if (n == 0) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(gradients[a]) > std::abs(gradients[b]);
  });
  const std::size_t top = std::min(n, ceil_fraction(top_rate, n));
  const std::size_t rest = n - top;
  const std::size_t other = std::min(rest, ceil_fraction(other_rate, n));
  const double amplify = (1.0 - top_rate) / other_rate;

  std::vector<std::pair<std::size_t, double>> picked;
  picked.reserve(top + other);
  for (std::size_t i = 0; i < top; ++i) picked.emplace_back(order[i], 1.0);
  Rng rng(seed);
  for (std::size_t j : rng.sample_without_replacement(rest, other)) {
    picked.emplace_back(order[top + j], amplify);
  }
  std::sort(picked.begin(), picked.end());
  for (const auto& [row, w] : picked) {
    out.rows.push_back(row);
    out.weights.push_back(w);
  }
  return out;
}

DartDrop dart_drop(std::size_t trees_so_far, double drop_rate, std::uint64_t seed) {
  if (!(drop_rate >= 0.0 && drop_rate <= 1.0)) fail(ErrorCode::InvalidRates, "drop_rate in [0, 1]");
  DartDrop out;
  Rng rng(seed);
  for (std::size_t i = 0; i < trees_so_far; ++i) {
    if (rng.bernoulli(drop_rate)) out.dropped.push_back(i);
  }
  // With two or more trees at least one survives.
  if (trees_so_far >= 2 && out.dropped.size() == trees_so_far) {
    out.dropped.erase(out.dropped.begin() + static_cast<std::ptrdiff_t>(rng.below(trees_so_far)));
  }
  const auto k = static_cast<double>(out.dropped.size());
  out.new_tree_factor = 1.0 / (k + 1.0);
  out.dropped_factor = k / (k + 1.0);
  return out;
}

BoostedModel fit(const FeatureMatrix& x, std::span<const double> y, const HyperParams& hp,
                 std::uint64_t seed, const FitOptions& options, FitDiagnostics* diagnostics) {
  hp.validate();
  if (y.empty()) fail(ErrorCode::DegenerateTarget, "empty target");
  if (x.rows() != y.size()) {
    fail(ErrorCode::ShapeMismatch, std::to_string(x.rows()) + " rows vs " +
                                       std::to_string(y.size()) + " targets");
  }
  const std::size_t min_rows = std::max<std::size_t>(2 * static_cast<std::size_t>(hp.min_child_samples), 20);
  if (y.size() < min_rows) {
    fail(ErrorCode::TooFewRows, std::to_string(y.size()) + " rows, need " + std::to_string(min_rows));
  }
  check_finite(x.values, "feature matrix");
  check_finite(y, "target");

  const std::size_t n = y.size();
  const std::size_t nf = x.cols();

  // Canonical row order (lexicographic on features, then target) makes the
  // fitted model independent of the caller's row order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t c = 0; c < nf; ++c) {
      const double va = x.at(a, c);
      const double vb = x.at(b, c);
      if (va != vb) return va < vb;
    }
    return y[a] < y[b];
  });
  std::vector<std::vector<double>> columns(nf, std::vector<double>(n));
  std::vector<double> yc(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < nf; ++c) columns[c][i] = x.at(order[i], c);
    yc[i] = y[order[i]];
  }
  std::vector<std::vector<double>> rows(n, std::vector<double>(nf));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < nf; ++c) rows[i][c] = columns[c][i];
  }
  const BinnedData data = bin_features(columns);

  BoostedModel model;
  model.params = hp;
  model.feature_names = x.column_names;
  double ysum = 0.0;
  for (double v : yc) ysum += v;
  model.base_score = ysum / static_cast<double>(n);

  std::vector<double> pred(n, model.base_score);
  std::vector<std::vector<double>> tree_outputs;  // per tree, per canonical row
  const auto sse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (pred[i] - yc[i]) * (pred[i] - yc[i]);
    return s;
  };
  if (diagnostics) {
    diagnostics->train_sse.assign(1, sse());
    diagnostics->rows_per_tree.clear();
  }

  const bool is_dart = hp.boosting_type == BoostingType::Dart;
  const bool is_goss = hp.boosting_type == BoostingType::Goss;
  std::vector<double> grad(n);
  std::vector<int> all_features(nf);
  std::iota(all_features.begin(), all_features.end(), 0);

  for (int iter = 0; iter < hp.n_estimators; ++iter) {
    const auto it = static_cast<std::uint64_t>(iter);
    DartDrop drop;
    std::vector<double> base_pred = pred;
    if (is_dart) {
      drop = dart_drop(model.trees.size(), options.dart_drop_rate, derive_seed({seed, it, 1}));
      for (std::size_t t : drop.dropped) {
        for (std::size_t i = 0; i < n; ++i) base_pred[i] -= model.tree_weights[t] * tree_outputs[t][i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) grad[i] = base_pred[i] - yc[i];

    std::vector<std::size_t> sample_rows;
    std::vector<double> sample_grad;
    std::vector<double> sample_hess;
    if (is_goss) {
      GossSample goss = sample_rows_goss(grad, options.goss_top_rate, options.goss_other_rate,
                                         derive_seed({seed, it, 2}));
      sample_rows = std::move(goss.rows);
      sample_hess = std::move(goss.weights);
    } else if (hp.subsample < 1.0) {
      Rng bag(derive_seed({seed, it, 3}));
      sample_rows = bag.sample_without_replacement(n, ceil_fraction(hp.subsample, n));
      sample_hess.assign(sample_rows.size(), 1.0);
    } else {
      sample_rows.resize(n);
      std::iota(sample_rows.begin(), sample_rows.end(), std::size_t{0});
      sample_hess.assign(n, 1.0);
    }
    sample_grad.resize(sample_rows.size());
    for (std::size_t k = 0; k < sample_rows.size(); ++k) {
      sample_grad[k] = grad[sample_rows[k]] * sample_hess[k];
    }

    std::vector<int> features = all_features;
    if (hp.colsample_bytree < 1.0 && nf > 0) {
      Rng cols(derive_seed({seed, it, 4}));
      const auto picked = cols.sample_without_replacement(nf, ceil_fraction(hp.colsample_bytree, nf));
      features.assign(picked.begin(), picked.end());
    }

    TreeGrower grower(data, hp, options, sample_rows, sample_grad, sample_hess, features);
    Tree tree = grower.grow();

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = tree.predict(rows[i]);

    double weight = hp.learning_rate;
    if (is_dart) {
      weight *= drop.new_tree_factor;
      for (std::size_t t : drop.dropped) model.tree_weights[t] *= drop.dropped_factor;
    }
    model.trees.push_back(std::move(tree));
    model.tree_weights.push_back(weight);
    tree_outputs.push_back(std::move(out));

    if (is_dart && !drop.dropped.empty()) {
      // Rebuild in tree order so the cache matches predict_row exactly.
      for (std::size_t i = 0; i < n; ++i) {
        double p = model.base_score;
        for (std::size_t t = 0; t < model.trees.size(); ++t) p += model.tree_weights[t] * tree_outputs[t][i];
        pred[i] = p;
      }
    } else {
      const auto& latest = tree_outputs.back();
      for (std::size_t i = 0; i < n; ++i) pred[i] += weight * latest[i];
    }
    if (!is_dart) tree_outputs.back().clear();  // only DART revisits old outputs
    if (diagnostics) {
      diagnostics->train_sse.push_back(sse());
      diagnostics->rows_per_tree.push_back(sample_rows.size());
    }
  }
  return model;
}

nlohmann::json params_to_json(const HyperParams& hp) {
  return {
      {"boosting_type", std::string(to_string(hp.boosting_type))},
      {"num_leaves", hp.num_leaves},
      {"max_depth", hp.max_depth},
      {"learning_rate", hp.learning_rate},
      {"n_estimators", hp.n_estimators},
      {"subsample", hp.subsample},
      {"colsample_bytree", hp.colsample_bytree},
      {"min_child_samples", hp.min_child_samples},
      {"reg_alpha", hp.reg_alpha},
      {"reg_lambda", hp.reg_lambda},
  };
}

HyperParams params_from_json(const nlohmann::json& doc) {
  HyperParams hp;
  try {
    const auto bt = parse_boosting_type(doc.at("boosting_type").get<std::string>());
    if (!bt) fail(ErrorCode::BadModel, "unknown boosting_type");
    hp.boosting_type = *bt;
    hp.num_leaves = doc.at("num_leaves").get<int>();
    hp.max_depth = doc.at("max_depth").get<int>();
    hp.learning_rate = doc.at("learning_rate").get<double>();
    hp.n_estimators = doc.at("n_estimators").get<int>();
    hp.subsample = doc.at("subsample").get<double>();
    hp.colsample_bytree = doc.at("colsample_bytree").get<double>();
    hp.min_child_samples = doc.at("min_child_samples").get<int>();
    hp.reg_alpha = doc.at("reg_alpha").get<double>();
    hp.reg_lambda = doc.at("reg_lambda").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadModel, std::string("params: ") + e.what());
  }
  return hp;
}

nlohmann::json model_to_json(const BoostedModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : model.trees[t].nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"leaf", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold},
                         {"left", n.left}, {"right", n.right}});
      }
    }
    trees.push_back({{"weight", model.tree_weights[t]}, {"nodes", std::move(nodes)}});
  }
  return {
      {"format", "featgate.model"},
      {"version", kModelFormatVersion},
      {"base_score", model.base_score},
      {"params", params_to_json(model.params)},
      {"feature_names", model.feature_names},
      {"trees", std::move(trees)},
  };
}

BoostedModel model_from_json(const nlohmann::json& doc) {
  BoostedModel m;
  try {
    if (doc.at("format") != "featgate.model") fail(ErrorCode::BadModel, "not a featgate model");
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      fail(ErrorCode::BadModel, "unsupported model version");
    }
    m.base_score = doc.at("base_score").get<double>();
    m.params = params_from_json(doc.at("params"));
    m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    for (const auto& jt : doc.at("trees")) {
      Tree tree;
      for (const auto& jn : jt.at("nodes")) {
        TreeNode n;
        if (jn.contains("leaf")) {
          n.value = jn.at("leaf").get<double>();
        } else {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
        }
        tree.nodes.push_back(n);
      }
      // Children must point forward inside the tree and at known features.
      const auto count = static_cast<int>(tree.nodes.size());
      for (int i = 0; i < count; ++i) {
        const TreeNode& n = tree.nodes[static_cast<std::size_t>(i)];
        if (n.is_leaf()) continue;
        if (n.left <= i || n.right <= i || n.left >= count || n.right >= count ||
            n.feature >= static_cast<int>(m.feature_names.size())) {
          fail(ErrorCode::BadModel, "malformed tree");
        }
      }
      if (tree.nodes.empty()) fail(ErrorCode::BadModel, "empty tree");
      m.trees.push_back(std::move(tree));
      m.tree_weights.push_back(jt.at("weight").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadModel, e.what());
  }
  return m;
}

}  // namespace featgate
