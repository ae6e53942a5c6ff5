#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "featgate/ingest.hpp"

namespace featgate {

// Benchmark data where the 7-day-ahead return is driven by a hidden
// indicator: target[t] = scale * (signal_weight * g(t) + noise_sd * e), with
// g(t) the unit-variance mean of the indicator over [t-2, t]. Past returns
// carry no information about g(t), so only the augmented pool can reach it.
struct SyntheticOptions {
  // Aligned rows (after the horizon shift), lookback rows included.
  std::size_t rows = 558 + 14;
  std::size_t noise_indicators = 6;
  double signal_weight = 0.6;
  double noise_sd = 0.4;
  double scale = 0.03;
  int horizon = 7;
  std::uint64_t seed = 1;
  std::string signal_name = "signal_ind";
};

AlignedDataset injected_signal_dataset(const SyntheticOptions& options);

}  // namespace featgate
