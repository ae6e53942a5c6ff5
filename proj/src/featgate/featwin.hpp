#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "featgate/ingest.hpp"

namespace featgate {

// Window summary statistics. Code 2 is reserved (entropy) and never valid.
enum class FunctionCode : int {
  Empty = -1,
  Raw = 0,
  Mean = 1,
  Median = 3,
  Max = 4,
  Min = 5,
  Range = 6,
  Sum = 7,
  First = 8,
  Last = 9,
  Diff = 10,
  PctChange = 11,
  P25 = 12,
  P50 = 13,
  P75 = 14,
  Iqr = 15,
};

inline constexpr int kMaxOffset = 8;
inline constexpr int kMaxWindowLength = 7;
inline constexpr std::size_t kMaxEnabledFeatures = 6;
inline constexpr int kDefaultLookback = 14;

// All valid codes in ascending order.
std::span<const FunctionCode> all_function_codes();
FunctionCode function_code_from_int(int code);
std::string_view suffix(FunctionCode fc);

struct FeatureSpec {
  std::string series;
  int w0 = 0;
  int wl = 1;
  FunctionCode fc = FunctionCode::Mean;

  bool enabled() const noexcept { return fc != FunctionCode::Empty; }
  // Deepest lag touched by the window.
  int depth() const noexcept { return w0 + wl - 1; }
  void validate() const;

  // "series|w0|wl|fc"
  std::string compact() const;
  static FeatureSpec parse_compact(std::string_view text);

  // Generated column names, e.g. Returns_p75 or Returns_1, Returns_2.
  std::vector<std::string> column_names() const;
  // One name per spec independent of window geometry; raw windows use "_raw".
  std::string feature_name() const;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct FcCounters {
  // Relative-change windows whose first value was zero.
  std::size_t zero_base_pctch = 0;
};

// Values at [t - w0 - wl + 1, t - w0], oldest first.
std::vector<double> window_slice(std::span<const double> x, std::size_t t, int w0, int wl);

std::vector<double> apply_fc(std::span<const double> window, FunctionCode fc,
                             FcCounters* counters = nullptr);

// Linear interpolation at rank q * (n - 1) of the sorted values.
double percentile(std::span<const double> values, double q);

struct FeatureMatrix {
  std::vector<std::string> column_names;
  // Row-major, rows() x cols().
  std::vector<double> values;
  // Empty for matrices not built from a dataset.
  std::vector<Date> row_dates;
  // Dataset row of matrix row 0.
  std::size_t first_row = 0;
  std::size_t n_rows = 0;

  static FeatureMatrix from_values(std::vector<std::string> names, std::vector<double> values);

  std::size_t rows() const noexcept { return n_rows; }
  std::size_t cols() const noexcept { return column_names.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols(), cols()};
  }
  std::vector<double> column(std::size_t c) const;
  // Rows [begin, end) as a new matrix.
  FeatureMatrix slice_rows(std::size_t begin, std::size_t end) const;
};

// Rows start at max_lookback so every spec set sees the same rows.
FeatureMatrix build_matrix(const AlignedDataset& d, std::span<const FeatureSpec> specs,
                           int max_lookback = kDefaultLookback, FcCounters* counters = nullptr);

// Targets matching build_matrix rows.
std::vector<double> matrix_targets(const AlignedDataset& d, int max_lookback = kDefaultLookback);

}  // namespace featgate
