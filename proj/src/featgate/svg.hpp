#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "featgate/metrics.hpp"

namespace featgate::svg {

struct Series {
  std::string label;
  std::vector<double> values;
};

// Two-arm histogram on shared edges. Each bar is a <rect> carrying
// data-arm, data-bin and data-count; bar height is count * (plot height /
// largest count).
std::string histogram(std::string_view title, const Series& a, const Series& b, std::size_t bins);

// Lines of actual and predicted values over row index.
std::string overlay(std::string_view title, std::span<const double> actual,
                    std::span<const double> predicted);

// Horizontal bars, largest drop first.
std::string importance_bars(std::string_view title, std::span<const PfiEntry> entries,
                            std::size_t max_bars = 15);

std::string escape(std::string_view text);

}  // namespace featgate::svg
