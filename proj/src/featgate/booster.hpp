#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "featgate/featwin.hpp"

namespace featgate {

enum class BoostingType { Gbdt, Dart, Goss };

std::string_view to_string(BoostingType type);
std::optional<BoostingType> parse_boosting_type(std::string_view text);

struct ParamRange {
  double lo;
  double hi;
};

// Search space of the tuned learner. Decoding of genomes reads these.
namespace param_space {
inline constexpr std::array kBoostingTypes = {BoostingType::Gbdt, BoostingType::Dart,
                                              BoostingType::Goss};
inline constexpr std::array kMaxDepths = {-1, 5, 10, 15, 20};
inline constexpr ParamRange kNumLeaves{1, 100};
inline constexpr ParamRange kLearningRate{0.001, 0.1};
inline constexpr ParamRange kEstimators{3, 200};
inline constexpr ParamRange kSubsample{0.5, 1.0};
inline constexpr ParamRange kColsample{0.5, 1.0};
inline constexpr ParamRange kMinChildSamples{10, 50};
inline constexpr ParamRange kRegAlpha{0.0, 1.0};
inline constexpr ParamRange kRegLambda{0.0, 1.0};
}  // namespace param_space

struct HyperParams {
  BoostingType boosting_type = BoostingType::Gbdt;
  int num_leaves = 31;
  int max_depth = -1;  // -1 = unlimited
  double learning_rate = 0.1;
  int n_estimators = 100;
  double subsample = 1.0;
  double colsample_bytree = 1.0;
  int min_child_samples = 20;
  double reg_alpha = 0.0;
  double reg_lambda = 0.0;

  // Structural checks only; values outside the search space are allowed.
  void validate() const;
  // True when every field lies in the tuned search space.
  bool in_search_space() const;

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

// Flat node storage; node 0 is the root. Leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  // x <= threshold goes left.
  double predict(std::span<const double> row) const;
  std::size_t leaf_count() const;
  int depth() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct BoostedModel {
  std::vector<Tree> trees;
  std::vector<double> tree_weights;
  double base_score = 0.0;
  HyperParams params;
  std::vector<std::string> feature_names;

  double predict_row(std::span<const double> row) const;
  std::vector<double> predict(const FeatureMatrix& x) const;

  friend bool operator==(const BoostedModel&, const BoostedModel&) = default;
};

struct FitOptions {
  // Workers for per-feature histogram construction. 0 = hardware threads.
  std::size_t threads = 1;
  // Histogram work (rows x features) below which a node is built serially.
  std::size_t parallel_min_work = 1 << 14;
  double dart_drop_rate = 0.1;
  double goss_top_rate = 0.2;
  double goss_other_rate = 0.1;
};

struct FitDiagnostics {
  // Training sum of squared errors before the first tree and after each one.
  std::vector<double> train_sse;
  // Training rows that reached each tree (after bagging or GOSS).
  std::vector<std::size_t> rows_per_tree;
};

BoostedModel fit(const FeatureMatrix& x, std::span<const double> y, const HyperParams& hp,
                 std::uint64_t seed, const FitOptions& options = {},
                 FitDiagnostics* diagnostics = nullptr);

std::vector<double> predict(const BoostedModel& model, const FeatureMatrix& x);

struct GossSample {
  // Ascending row indices.
  std::vector<std::size_t> rows;
  // Gradient/hessian multiplier per selected row.
  std::vector<double> weights;
};

GossSample sample_rows_goss(std::span<const double> gradients, double top_rate,
                            double other_rate, std::uint64_t seed);

struct DartDrop {
  std::vector<std::size_t> dropped;
  // Multiplier for the tree fitted this iteration.
  double new_tree_factor = 1.0;
  // Multiplier applied to every dropped tree.
  double dropped_factor = 1.0;
};

DartDrop dart_drop(std::size_t trees_so_far, double drop_rate, std::uint64_t seed);

// Upper bin thresholds for one feature: equal-frequency over the training
// values, at most max_bins bins, each threshold halfway between two
// neighbouring distinct values.
std::vector<double> bin_thresholds(std::span<const double> values, std::size_t max_bins = 255);

// Versioned JSON model document.
nlohmann::json model_to_json(const BoostedModel& model);
BoostedModel model_from_json(const nlohmann::json& doc);
nlohmann::json params_to_json(const HyperParams& hp);
HyperParams params_from_json(const nlohmann::json& doc);

}  // namespace featgate
