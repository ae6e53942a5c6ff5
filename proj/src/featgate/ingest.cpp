#include "featgate/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "featgate/error.hpp"

namespace featgate {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> date_order(const std::vector<Date>& dates) {
  std::vector<std::size_t> order(dates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dates[a] < dates[b]; });
  return order;
}

void reject_duplicates(const std::vector<Date>& sorted_dates) {
  for (std::size_t i = 1; i < sorted_dates.size(); ++i) {
    if (sorted_dates[i] == sorted_dates[i - 1]) {
      fail(ErrorCode::DuplicateDate, format_date(sorted_dates[i]));
    }
  }
}

std::size_t require_column(const CsvTable& table, std::string_view name) {
  const auto idx = table.column(name);
  if (!idx) fail(ErrorCode::MissingColumn, std::string(name));
  return *idx;
}

Date require_date(std::string_view cell, std::size_t row) {
  const auto d = parse_date(cell);
  if (!d) {
    fail(ErrorCode::UnparsableDate,
         "'" + std::string(cell) + "' at data row " + std::to_string(row + 1));
  }
  return *d;
}

bool is_baseline_name(std::string_view name) {
  return name == kReturns || name == kDayOfWeekCos || name == kDoyCos;
}

}  // namespace

std::string_view to_string(PoolTag tag) {
  return tag == PoolTag::Baseline ? "Baseline" : "Augmented";
}

std::string_view to_string(GapPolicy policy) {
  return policy == GapPolicy::ForwardFillThenZero ? "forward_fill_then_zero" : "zero";
}

std::optional<GapPolicy> parse_gap_policy(std::string_view text) {
  if (text == "forward_fill_then_zero") return GapPolicy::ForwardFillThenZero;
  if (text == "zero") return GapPolicy::ZeroFill;
  return std::nullopt;
}

std::optional<std::size_t> AlignedDataset::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

const std::vector<double>& AlignedDataset::series(std::string_view name) const {
  const auto idx = index_of(name);
  if (!idx) fail(ErrorCode::UnknownSeries, std::string(name));
  return columns[*idx];
}

PriceSeries parse_prices(const CsvTable& table, std::string_view date_col,
                         std::string_view close_col) {
  const std::size_t dc = require_column(table, date_col);
  const std::size_t cc = require_column(table, close_col);

  std::vector<Date> dates;
  std::vector<double> close;
  dates.reserve(table.rows.size());
  close.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    dates.push_back(require_date(row[dc], r));
    const auto value = parse_double(row[cc]);
    if (!value) {
      fail(ErrorCode::UnparsableNumber,
           "close '" + row[cc] + "' at data row " + std::to_string(r + 1));
    }
    if (!(*value > 0.0) || !std::isfinite(*value)) {
      fail(ErrorCode::NonPositivePrice, row[cc] + " on " + row[dc]);
    }
    close.push_back(*value);
  }

  PriceSeries out;
  const auto order = date_order(dates);
  out.dates.reserve(order.size());
  out.close.reserve(order.size());
  for (std::size_t i : order) {
    out.dates.push_back(dates[i]);
    out.close.push_back(close[i]);
  }
  reject_duplicates(out.dates);
  if (out.dates.size() < 2) fail(ErrorCode::TooShort, "price series needs at least 2 rows");
  return out;
}

PriceSeries load_prices(const std::filesystem::path& path, std::string_view date_col,
                        std::string_view close_col) {
  return parse_prices(read_csv(path), date_col, close_col);
}

IndicatorTable parse_indicators(const CsvTable& table, const IndicatorOptions& options) {
  const std::size_t dc = require_column(table, options.date_col);
  const auto lc = table.column(options.location_col);

  std::vector<std::size_t> keep_rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (lc && options.location && table.rows[r][*lc] != *options.location) continue;
    keep_rows.push_back(r);
  }

  std::vector<std::size_t> value_cols;
  std::vector<std::string> names;
  if (!options.columns.empty()) {
    for (const auto& name : options.columns) {
      value_cols.push_back(require_column(table, name));
      names.push_back(name);
    }
  } else {
    // Every column with at least one numeric cell and no non-numeric cells.
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c == dc || (lc && c == *lc)) continue;
      bool numeric = true;
      bool seen = false;
      for (std::size_t r : keep_rows) {
        const auto& cell = table.rows[r][c];
        if (cell.empty()) continue;
        if (!parse_double(cell)) {
          numeric = false;
          break;
        }
        seen = true;
      }
      if (numeric && seen) {
        value_cols.push_back(c);
        names.push_back(table.header[c]);
      }
    }
  }

  std::vector<Date> dates;
  dates.reserve(keep_rows.size());
  for (std::size_t r : keep_rows) dates.push_back(require_date(table.rows[r][dc], r));
  const auto order = date_order(dates);

  IndicatorTable out;
  out.names = names;
  out.columns.assign(names.size(), {});
  for (std::size_t i : order) {
    out.dates.push_back(dates[i]);
    const auto& row = table.rows[keep_rows[i]];
    for (std::size_t k = 0; k < value_cols.size(); ++k) {
      const auto& cell = row[value_cols[k]];
      double v = kNaN;
      if (!cell.empty()) {
        const auto parsed = parse_double(cell);
        if (!parsed) {
          fail(ErrorCode::UnparsableNumber,
               names[k] + " '" + cell + "' on " + format_date(dates[i]));
        }
        v = *parsed;
      }
      out.columns[k].push_back(v);
    }
  }
  reject_duplicates(out.dates);
  return out;
}

IndicatorTable load_indicators(const std::filesystem::path& path, const IndicatorOptions& options) {
  return parse_indicators(read_csv(path), options);
}

NamedSeries log_returns(const PriceSeries& prices) {
  if (prices.close.size() < 2) fail(ErrorCode::TooShort, "log returns need at least 2 prices");
  NamedSeries out;
  out.name = std::string(kReturns);
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  out.values.reserve(prices.close.size() - 1);
  for (std::size_t t = 1; t < prices.close.size(); ++t) {
    out.values.push_back(std::log(prices.close[t] / prices.close[t - 1]));
  }
  return out;
}

int day_of_week(Date d) {
  return static_cast<int>(std::chrono::weekday{d}.iso_encoding()) - 1;
}

int day_of_year(Date d) {
  const std::chrono::year_month_day ymd{d};
  const Date jan1{ymd.year() / std::chrono::January / 1};
  return static_cast<int>((d - jan1).count()) + 1;
}

std::pair<NamedSeries, NamedSeries> calendar_features(std::span<const Date> dates) {
  NamedSeries dow{std::string(kDayOfWeekCos), {dates.begin(), dates.end()}, {}};
  NamedSeries doy{std::string(kDoyCos), {dates.begin(), dates.end()}, {}};
  dow.values.reserve(dates.size());
  doy.values.reserve(dates.size());
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (Date d : dates) {
    dow.values.push_back(std::cos(two_pi * day_of_week(d) / 7.0));
    doy.values.push_back(std::cos(two_pi * (day_of_year(d) - 1) / 365.25));
  }
  return {std::move(dow), std::move(doy)};
}

AlignedDataset join_series(const NamedSeries& returns,
                           const std::pair<NamedSeries, NamedSeries>& calendar,
                           const IndicatorTable* indicators, GapPolicy gap_policy) {
  // Fill indicator gaps on the indicator's own timeline so forward-fill can
  // carry values observed before the joined range.
  std::vector<std::vector<double>> filled;
  if (indicators) {
    filled = indicators->columns;
    for (std::size_t k = 0; k < filled.size(); ++k) {
      auto& col = filled[k];
      const bool observed = std::any_of(col.begin(), col.end(),
                                        [](double v) { return !std::isnan(v); });
      if (!observed) fail(ErrorCode::AllGapColumn, indicators->names[k]);
      double last = kNaN;
      for (double& v : col) {
        if (!std::isnan(v)) {
          last = v;
        } else if (gap_policy == GapPolicy::ForwardFillThenZero && !std::isnan(last)) {
          v = last;
        } else {
          v = 0.0;
        }
      }
    }
  }

  const NamedSeries* sources[] = {&returns, &calendar.first, &calendar.second};
  std::vector<std::size_t> pos(4, 0);
  AlignedDataset out;
  out.names = {returns.name, calendar.first.name, calendar.second.name};
  if (indicators) {
    out.names.insert(out.names.end(), indicators->names.begin(), indicators->names.end());
  }
  out.columns.assign(out.names.size(), {});
  out.pool_tag = indicators ? PoolTag::Augmented : PoolTag::Baseline;

  // Sorted-merge intersection over the date indices.
  for (const Date d : returns.dates) {
    bool present = true;
    for (std::size_t s = 1; s < 3 && present; ++s) {
      const auto& dates = sources[s]->dates;
      while (pos[s] < dates.size() && dates[pos[s]] < d) ++pos[s];
      present = pos[s] < dates.size() && dates[pos[s]] == d;
    }
    if (present && indicators) {
      const auto& dates = indicators->dates;
      while (pos[3] < dates.size() && dates[pos[3]] < d) ++pos[3];
      present = pos[3] < dates.size() && dates[pos[3]] == d;
    }
    if (!present) {
      ++pos[0];
      continue;
    }
    out.dates.push_back(d);
    out.columns[0].push_back(returns.values[pos[0]]);
    out.columns[1].push_back(calendar.first.values[pos[1]]);
    out.columns[2].push_back(calendar.second.values[pos[2]]);
    for (std::size_t k = 0; k < filled.size(); ++k) out.columns[3 + k].push_back(filled[k][pos[3]]);
    ++pos[0];
  }
  if (out.dates.empty()) fail(ErrorCode::EmptyIntersection, "no common dates across inputs");
  for (std::size_t c = 0; c < out.columns.size(); ++c) {
    for (double v : out.columns[c]) {
      if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, "non-finite value in " + out.names[c]);
    }
  }
  return out;
}

AlignedDataset attach_target(AlignedDataset joined, int horizon) {
  if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be >= 1");
  const auto h = static_cast<std::size_t>(horizon);
  if (joined.rows() <= h) {
    fail(ErrorCode::TooShort, std::to_string(joined.rows()) + " rows cannot carry horizon " +
                                  std::to_string(horizon));
  }
  const auto& returns = joined.series(kReturns);
  const std::size_t n = joined.rows() - h;
  joined.target.assign(returns.begin() + static_cast<std::ptrdiff_t>(h), returns.end());
  joined.dates.resize(n);
  for (auto& col : joined.columns) col.resize(n);
  joined.horizon = horizon;
  return joined;
}

AlignedDataset align(const NamedSeries& returns,
                     const std::pair<NamedSeries, NamedSeries>& calendar,
                     const IndicatorTable* indicators, int horizon, GapPolicy gap_policy) {
  if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be >= 1");
  return attach_target(join_series(returns, calendar, indicators, gap_policy), horizon);
}

SplitIndices chronological_split(std::size_t rows, std::size_t train_end, std::size_t test_len) {
  if (train_end == 0 || test_len == 0 || train_end + test_len > rows) {
    fail(ErrorCode::OutOfRange, "split " + std::to_string(train_end) + "/" +
                                    std::to_string(test_len) + " does not fit " +
                                    std::to_string(rows) + " rows");
  }
  return {train_end, test_len};
}

SplitIndices chronological_split(const AlignedDataset& d, std::size_t train_end,
                                 std::size_t test_len) {
  return chronological_split(d.rows(), train_end, test_len);
}

std::string dataset_to_csv(const AlignedDataset& d) {
  std::string out = "date";
  for (const auto& name : d.names) {
    out += ',';
    out += name;
  }
  out += ",target__h" + std::to_string(d.horizon) + "\n";
  for (std::size_t t = 0; t < d.rows(); ++t) {
    out += format_date(d.dates[t]);
    for (const auto& col : d.columns) {
      out += ',';
      out += format_double(col[t]);
    }
    out += ',';
    out += format_double(d.target[t]);
    out += '\n';
  }
  return out;
}

AlignedDataset dataset_from_csv(const CsvTable& table) {
  if (table.header.size() < 3 || table.header.front() != "date") {
    fail(ErrorCode::MissingColumn, "dataset CSV must start with a date column");
  }
  const std::string& last = table.header.back();
  constexpr std::string_view prefix = "target__h";
  if (!last.starts_with(prefix)) fail(ErrorCode::MissingColumn, "target__h<horizon>");
  AlignedDataset d;
  try {
    d.horizon = std::stoi(last.substr(prefix.size()));
  } catch (const std::exception&) {
    fail(ErrorCode::MissingColumn, "malformed target column '" + last + "'");
  }
  d.names.assign(table.header.begin() + 1, table.header.end() - 1);
  if (!d.index_of(kReturns)) fail(ErrorCode::MissingColumn, std::string(kReturns));
  d.columns.assign(d.names.size(), {});
  d.pool_tag = std::all_of(d.names.begin(), d.names.end(), is_baseline_name)
                   ? PoolTag::Baseline
                   : PoolTag::Augmented;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    d.dates.push_back(require_date(row[0], r));
    for (std::size_t c = 1; c < row.size(); ++c) {
      const auto v = parse_double(row[c]);
      if (!v) fail(ErrorCode::UnparsableNumber, table.header[c] + " '" + row[c] + "'");
      if (!std::isfinite(*v)) fail(ErrorCode::NonFiniteInput, table.header[c]);
      if (c + 1 == row.size()) {
        d.target.push_back(*v);
      } else {
        d.columns[c - 1].push_back(*v);
      }
    }
  }
  for (std::size_t i = 1; i < d.dates.size(); ++i) {
    if (d.dates[i] <= d.dates[i - 1]) {
      fail(d.dates[i] == d.dates[i - 1] ? ErrorCode::DuplicateDate : ErrorCode::UnparsableDate,
           "dataset dates must be strictly increasing at " + format_date(d.dates[i]));
    }
  }
  return d;
}

void save_dataset(const AlignedDataset& d, const std::filesystem::path& path) {
  write_text_file(path, dataset_to_csv(d));
}

AlignedDataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_csv(read_csv(path));
}

std::vector<std::string> baseline_pool() {
  return {std::string(kReturns), std::string(kDayOfWeekCos), std::string(kDoyCos)};
}

std::vector<std::string> augmented_pool(const AlignedDataset& d) {
  auto pool = baseline_pool();
  for (const auto& name : d.names) {
    if (!is_baseline_name(name)) pool.push_back(name);
  }
  return pool;
}

}  // namespace featgate
