#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "featgate/csv.hpp"

namespace featgate {

inline constexpr std::string_view kReturns = "Returns";
inline constexpr std::string_view kDayOfWeekCos = "DayOfWeek_cos";
inline constexpr std::string_view kDoyCos = "DOY_cos";

struct PriceSeries {
  std::vector<Date> dates;
  std::vector<double> close;
};

// One daily series with its own date index.
struct NamedSeries {
  std::string name;
  std::vector<Date> dates;
  std::vector<double> values;
};

// Exogenous indicators; NaN marks a gap.
struct IndicatorTable {
  std::vector<Date> dates;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

enum class PoolTag { Baseline, Augmented };
enum class GapPolicy { ForwardFillThenZero, ZeroFill };

std::string_view to_string(PoolTag tag);
std::string_view to_string(GapPolicy policy);
std::optional<GapPolicy> parse_gap_policy(std::string_view text);

// Base series on a shared date index plus the forward-shifted target.
// Series keep insertion order: Returns, the calendar pair, then indicators.
struct AlignedDataset {
  std::vector<Date> dates;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::vector<double> target;
  int horizon = 0;
  PoolTag pool_tag = PoolTag::Baseline;

  std::size_t rows() const noexcept { return dates.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  const std::vector<double>& series(std::string_view name) const;

  friend bool operator==(const AlignedDataset&, const AlignedDataset&) = default;
};

struct SplitIndices {
  std::size_t train_end = 0;
  std::size_t test_len = 0;
};

struct IndicatorOptions {
  std::string date_col = "date";
  std::string location_col = "location";
  // Rows whose location differs are dropped; ignored when the column is absent.
  std::optional<std::string> location;
  // Empty selects every numeric column.
  std::vector<std::string> columns;
};

PriceSeries parse_prices(const CsvTable& table, std::string_view date_col = "Date",
                         std::string_view close_col = "Close");
PriceSeries load_prices(const std::filesystem::path& path, std::string_view date_col = "Date",
                        std::string_view close_col = "Close");

IndicatorTable parse_indicators(const CsvTable& table, const IndicatorOptions& options);
IndicatorTable load_indicators(const std::filesystem::path& path, const IndicatorOptions& options);

NamedSeries log_returns(const PriceSeries& prices);

std::pair<NamedSeries, NamedSeries> calendar_features(std::span<const Date> dates);

// Monday = 0 ... Sunday = 6.
int day_of_week(Date d);
// January 1 = 1.
int day_of_year(Date d);

// Inner join of returns, calendar and indicators on date, with indicator gaps
// filled according to the policy. No target is attached (horizon = 0).
AlignedDataset join_series(const NamedSeries& returns,
                           const std::pair<NamedSeries, NamedSeries>& calendar,
                           const IndicatorTable* indicators, GapPolicy gap_policy);

// target[t] = Returns[t + horizon]; the final `horizon` rows are dropped.
AlignedDataset attach_target(AlignedDataset joined, int horizon);

AlignedDataset align(const NamedSeries& returns,
                     const std::pair<NamedSeries, NamedSeries>& calendar,
                     const IndicatorTable* indicators, int horizon,
                     GapPolicy gap_policy = GapPolicy::ForwardFillThenZero);

// Splits `rows` chronologically: [0, train_end) train, [train_end,
// train_end + test_len) test.
SplitIndices chronological_split(std::size_t rows, std::size_t train_end, std::size_t test_len);
SplitIndices chronological_split(const AlignedDataset& d, std::size_t train_end,
                                 std::size_t test_len);

// CSV export: date, every base series, target__h<horizon>.
std::string dataset_to_csv(const AlignedDataset& d);
AlignedDataset dataset_from_csv(const CsvTable& table);
void save_dataset(const AlignedDataset& d, const std::filesystem::path& path);
AlignedDataset load_dataset(const std::filesystem::path& path);

// Names of the calendar/return series every pool starts from.
std::vector<std::string> baseline_pool();
// Baseline pool followed by every other series of the dataset.
std::vector<std::string> augmented_pool(const AlignedDataset& d);

}  // namespace featgate
