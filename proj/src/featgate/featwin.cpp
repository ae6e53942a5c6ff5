#include "featgate/featwin.hpp"

#include <algorithm>
#include <array>
#include <charconv>

#include "featgate/error.hpp"

namespace featgate {

namespace {

constexpr std::array kCodes = {
    FunctionCode::Empty, FunctionCode::Raw,  FunctionCode::Mean,      FunctionCode::Median,
    FunctionCode::Max,   FunctionCode::Min,  FunctionCode::Range,     FunctionCode::Sum,
    FunctionCode::First, FunctionCode::Last, FunctionCode::Diff,      FunctionCode::PctChange,
    FunctionCode::P25,   FunctionCode::P50,  FunctionCode::P75,       FunctionCode::Iqr,
};

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    fail(ErrorCode::InvalidArgument, "bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::span<const FunctionCode> all_function_codes() { return kCodes; }

FunctionCode function_code_from_int(int code) {
  for (FunctionCode fc : kCodes) {
    if (static_cast<int>(fc) == code) return fc;
  }
  fail(ErrorCode::InvalidFunctionCode, std::to_string(code));
}

std::string_view suffix(FunctionCode fc) {
  switch (fc) {
    case FunctionCode::Empty: return "";
    case FunctionCode::Raw: return "raw";
    case FunctionCode::Mean: return "avg";
    case FunctionCode::Median: return "median";
    case FunctionCode::Max: return "max";
    case FunctionCode::Min: return "min";
    case FunctionCode::Range: return "range";
    case FunctionCode::Sum: return "sum";
    case FunctionCode::First: return "first";
    case FunctionCode::Last: return "last";
    case FunctionCode::Diff: return "diff";
    case FunctionCode::PctChange: return "pctch";
    case FunctionCode::P25: return "p25";
    case FunctionCode::P50: return "p50";
    case FunctionCode::P75: return "p75";
    case FunctionCode::Iqr: return "IQR";
  }
  return "";
}

void FeatureSpec::validate() const {
  if (w0 < 0 || w0 > kMaxOffset) fail(ErrorCode::OutOfRange, "w0 " + std::to_string(w0));
  if (wl < 1 || wl > kMaxWindowLength) fail(ErrorCode::OutOfRange, "wl " + std::to_string(wl));
  function_code_from_int(static_cast<int>(fc));
}

std::string FeatureSpec::compact() const {
  return series + "|" + std::to_string(w0) + "|" + std::to_string(wl) + "|" +
         std::to_string(static_cast<int>(fc));
}

FeatureSpec FeatureSpec::parse_compact(std::string_view text) {
  // Split from the right so series names may contain '|'.
  std::array<std::string_view, 3> nums;
  for (int i = 2; i >= 0; --i) {
    const auto bar = text.rfind('|');
    if (bar == std::string_view::npos) {
      fail(ErrorCode::InvalidArgument, "feature spec needs series|w0|wl|fc");
    }
    nums[static_cast<std::size_t>(i)] = text.substr(bar + 1);
    text = text.substr(0, bar);
  }
  FeatureSpec spec{std::string(text), parse_int(nums[0], "w0"), parse_int(nums[1], "wl"),
                   function_code_from_int(parse_int(nums[2], "fc"))};
  spec.validate();
  return spec;
}

std::vector<std::string> FeatureSpec::column_names() const {
  std::vector<std::string> out;
  if (fc == FunctionCode::Empty) return out;
  if (fc == FunctionCode::Raw) {
    for (int j = 0; j < wl; ++j) out.push_back(series + "_" + std::to_string(j + 1));
    return out;
  }
  out.push_back(series + "_" + std::string(suffix(fc)));
  return out;
}

std::string FeatureSpec::feature_name() const {
  return series + "_" + std::string(suffix(fc));
}

std::vector<double> window_slice(std::span<const double> x, std::size_t t, int w0, int wl) {
  if (w0 < 0 || wl < 1) fail(ErrorCode::InvalidArgument, "window geometry");
  const auto depth = static_cast<std::size_t>(w0 + wl - 1);
  if (t >= x.size()) fail(ErrorCode::OutOfRange, "row " + std::to_string(t));
  if (t < depth) {
    fail(ErrorCode::InsufficientHistory,
         "row " + std::to_string(t) + " lacks " + std::to_string(depth) + " lags");
  }
  const std::size_t first = t - depth;
  return {x.begin() + static_cast<std::ptrdiff_t>(first),
          x.begin() + static_cast<std::ptrdiff_t>(first + static_cast<std::size_t>(wl))};
}

double percentile(std::span<const double> values, double q) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(rank);
  const double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> apply_fc(std::span<const double> w, FunctionCode fc, FcCounters* counters) {
  function_code_from_int(static_cast<int>(fc));
  if (fc == FunctionCode::Empty) return {};
  if (w.empty()) fail(ErrorCode::InvalidArgument, "empty window");
  const auto [mn, mx] = std::minmax_element(w.begin(), w.end());
  double sum = 0.0;
  for (double v : w) sum += v;
  switch (fc) {
    case FunctionCode::Raw: return {w.begin(), w.end()};
    case FunctionCode::Mean: return {sum / static_cast<double>(w.size())};
    case FunctionCode::Median:
    case FunctionCode::P50: return {percentile(w, 0.5)};
    case FunctionCode::Max: return {*mx};
    case FunctionCode::Min: return {*mn};
    case FunctionCode::Range: return {*mx - *mn};
    case FunctionCode::Sum: return {sum};
    case FunctionCode::First: return {w.front()};
    case FunctionCode::Last: return {w.back()};
    case FunctionCode::Diff: return {w.back() - w.front()};
    case FunctionCode::PctChange:
      if (w.front() == 0.0) {
        if (counters) ++counters->zero_base_pctch;
        return {0.0};
      }
      return {(w.back() - w.front()) / w.front()};
    case FunctionCode::P25: return {percentile(w, 0.25)};
    case FunctionCode::P75: return {percentile(w, 0.75)};
    case FunctionCode::Iqr: return {percentile(w, 0.75) - percentile(w, 0.25)};
    case FunctionCode::Empty: break;
  }
  return {};
}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

FeatureMatrix FeatureMatrix::from_values(std::vector<std::string> names,
                                         std::vector<double> values) {
  FeatureMatrix m;
  m.column_names = std::move(names);
  m.values = std::move(values);
  if (m.column_names.empty()) {
    if (!m.values.empty()) fail(ErrorCode::ShapeMismatch, "values without columns");
  } else {
    if (m.values.size() % m.column_names.size() != 0) {
      fail(ErrorCode::ShapeMismatch, "value count is not a multiple of the column count");
    }
    m.n_rows = m.values.size() / m.column_names.size();
  }
  return m;
}

FeatureMatrix FeatureMatrix::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) fail(ErrorCode::OutOfRange, "row slice");
  FeatureMatrix out;
  out.column_names = column_names;
  out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(begin * cols()),
                    values.begin() + static_cast<std::ptrdiff_t>(end * cols()));
  if (!row_dates.empty()) {
    out.row_dates.assign(row_dates.begin() + static_cast<std::ptrdiff_t>(begin),
                         row_dates.begin() + static_cast<std::ptrdiff_t>(end));
  }
  out.first_row = first_row + begin;
  out.n_rows = end - begin;
  return out;
}

FeatureMatrix build_matrix(const AlignedDataset& d, std::span<const FeatureSpec> specs,
                           int max_lookback, FcCounters* counters) {
  if (max_lookback < 0) fail(ErrorCode::InvalidArgument, "negative lookback");
  const auto enabled = static_cast<std::size_t>(
      std::count_if(specs.begin(), specs.end(), [](const FeatureSpec& s) { return s.enabled(); }));
  if (enabled > kMaxEnabledFeatures) {
    fail(ErrorCode::TooManyFeatures, std::to_string(enabled) + " enabled features");
  }

  struct Source {
    const std::vector<double>* series;
    const FeatureSpec* spec;
  };
  std::vector<Source> sources;
  FeatureMatrix m;
  for (const auto& spec : specs) {
    spec.validate();
    const auto idx = d.index_of(spec.series);
    if (!idx) fail(ErrorCode::UnknownSeries, spec.series);
    if (!spec.enabled()) continue;
    if (spec.depth() > max_lookback) {
      fail(ErrorCode::InsufficientHistory, spec.compact() + " exceeds lookback " +
                                               std::to_string(max_lookback));
    }
    sources.push_back({&d.columns[*idx], &spec});
    for (auto& name : spec.column_names()) m.column_names.push_back(std::move(name));
  }

  const auto start = static_cast<std::size_t>(max_lookback);
  if (d.rows() <= start) {
    fail(ErrorCode::InsufficientHistory, std::to_string(d.rows()) + " rows with lookback " +
                                             std::to_string(max_lookback));
  }
  m.first_row = start;
  m.row_dates.assign(d.dates.begin() + static_cast<std::ptrdiff_t>(start), d.dates.end());
  m.n_rows = m.row_dates.size();
  m.values.reserve(m.rows() * m.cols());
  for (std::size_t t = start; t < d.rows(); ++t) {
    for (const auto& src : sources) {
      const auto w = window_slice(*src.series, t, src.spec->w0, src.spec->wl);
      for (double v : apply_fc(w, src.spec->fc, counters)) m.values.push_back(v);
    }
  }
  return m;
}

std::vector<double> matrix_targets(const AlignedDataset& d, int max_lookback) {
  const auto start = static_cast<std::size_t>(max_lookback);
  if (d.rows() <= start) fail(ErrorCode::InsufficientHistory, "dataset shorter than lookback");
  return {d.target.begin() + static_cast<std::ptrdiff_t>(start), d.target.end()};
}

}  // namespace featgate
