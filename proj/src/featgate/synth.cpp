#include "featgate/synth.hpp"

#include <cmath>

#include "featgate/error.hpp"
#include "featgate/rng.hpp"

namespace featgate {

AlignedDataset injected_signal_dataset(const SyntheticOptions& options) {
  if (options.rows < 2 || options.horizon < 1) fail(ErrorCode::InvalidArgument, "synthetic size");
  const std::size_t h = static_cast<std::size_t>(options.horizon);
  const std::size_t total = options.rows + h;
  Rng rng(options.seed);

  const Date start{std::chrono::year{2020} / std::chrono::December / 11};
  std::vector<Date> dates(total);
  for (std::size_t t = 0; t < total; ++t) dates[t] = start + std::chrono::days{static_cast<int>(t)};

  IndicatorTable ind;
  ind.dates = dates;
  std::vector<double> signal(total);
  for (double& v : signal) v = rng.normal();
  ind.names.push_back(options.signal_name);
  ind.columns.push_back(signal);
  for (std::size_t k = 0; k < options.noise_indicators; ++k) {
    // Random walks, like cumulative counters.
    std::vector<double> walk(total);
    double level = 0.0;
    for (double& v : walk) {
      level += rng.normal();
      v = level;
    }
    ind.names.push_back("noise_ind_" + std::to_string(k + 1));
    ind.columns.push_back(std::move(walk));
  }

  NamedSeries returns{std::string(kReturns), dates, std::vector<double>(total)};
  for (std::size_t t = 0; t < total; ++t) {
    double value = options.noise_sd * rng.normal();
    if (t >= h) {
      const std::size_t s = t - h;
      const std::size_t lo = s >= 2 ? s - 2 : 0;
      double sum = 0.0;
      for (std::size_t i = lo; i <= s; ++i) sum += signal[i];
      const double g = sum / std::sqrt(static_cast<double>(s - lo + 1));
      value += options.signal_weight * g;
    }
    returns.values[t] = options.scale * value;
  }

  const auto calendar = calendar_features(dates);
  return align(returns, calendar, &ind, options.horizon);
}

}  // namespace featgate
