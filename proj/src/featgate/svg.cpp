#include "featgate/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace featgate::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.5g", v);
  return buf;
}

std::string open(std::string_view title) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
       num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
       escape(title) + "</text>\n";
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + kPlotH) + "\" x2=\"" +
       num(kLeft + kPlotW) + "\" y2=\"" + num(kTop + kPlotH) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) +
       "\" y2=\"" + num(kTop + kPlotH) + "\" stroke=\"black\"/>\n";
  return s;
}

std::string text(double x, double y, std::string_view content, std::string_view anchor = "middle") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + std::string(anchor) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(content) + "</text>\n";
}

std::string legend(double x, double y, std::string_view color, std::string_view label) {
  return "<rect x=\"" + num(x) + "\" y=\"" + num(y - 9) + "\" width=\"10\" height=\"10\" fill=\"" +
         std::string(color) + "\"/>\n" + text(x + 14, y, label, "start");
}

}  // namespace

std::string escape(std::string_view in) {
  std::string out;
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string histogram(std::string_view title, const Series& a, const Series& b, std::size_t bins) {
  const SharedHistogram h = shared_histogram(a.values, b.values, bins);
  std::size_t max_count = 1;
  for (std::size_t i = 0; i < bins; ++i) {
    max_count = std::max({max_count, h.counts_a[i], h.counts_b[i]});
  }
  const double scale = kPlotH / static_cast<double>(max_count);
  const double slot = kPlotW / static_cast<double>(bins);
  const double bar = slot * 0.4;

  std::string s = open(title);
  const Series* arms[] = {&a, &b};
  const char* colors[] = {"#4C72B0", "#DD8452"};
  for (std::size_t arm = 0; arm < 2; ++arm) {
    const auto& counts = arm == 0 ? h.counts_a : h.counts_b;
    for (std::size_t i = 0; i < bins; ++i) {
      const double height = static_cast<double>(counts[i]) * scale;
      const double x = kLeft + slot * static_cast<double>(i) + slot * 0.1 + bar * static_cast<double>(arm);
      s += "<rect class=\"bar\" data-arm=\"" + escape(arms[arm]->label) + "\" data-bin=\"" +
           std::to_string(i) + "\" data-count=\"" + std::to_string(counts[i]) + "\" x=\"" + num(x) +
           "\" y=\"" + num(kTop + kPlotH - height) + "\" width=\"" + num(bar) + "\" height=\"" +
           num(height) + "\" fill=\"" + colors[arm] + "\" fill-opacity=\"0.8\"/>\n";
    }
  }
  s += text(kLeft, kTop + kPlotH + 16, label_num(h.lo));
  s += text(kLeft + kPlotW, kTop + kPlotH + 16, label_num(h.hi));
  s += text(kLeft - 6, kTop + 4, std::to_string(max_count), "end");
  s += text(kLeft - 6, kTop + kPlotH, "0", "end");
  s += legend(kLeft + kPlotW - 150, kTop + 4, colors[0], a.label);
  s += legend(kLeft + kPlotW - 150, kTop + 20, colors[1], b.label);
  s += "</svg>\n";
  return s;
}

std::string overlay(std::string_view title, std::span<const double> actual,
                    std::span<const double> predicted) {
  std::string s = open(title);
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (auto series : {actual, predicted}) {
    for (double v : series) {
      if (!std::isfinite(v)) continue;
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const std::size_t n = std::max(actual.size(), predicted.size());
  const auto x_of = [&](std::size_t i) {
    return kLeft + (n > 1 ? kPlotW * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0);
  };
  const auto y_of = [&](double v) { return kTop + kPlotH - (v - lo) / (hi - lo) * kPlotH; };
  const auto line = [&](std::span<const double> values, const char* color, const char* cls) {
    std::string pts;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) continue;
      if (!pts.empty()) pts += ' ';
      pts += num(x_of(i)) + "," + num(y_of(values[i]));
    }
    return "<polyline class=\"" + std::string(cls) + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.2\" points=\"" + pts + "\"/>\n";
  };
  s += line(actual, "#1f1f1f", "actual");
  s += line(predicted, "#d62728", "predicted");
  s += text(kLeft - 6, kTop + 4, label_num(hi), "end");
  s += text(kLeft - 6, kTop + kPlotH, label_num(lo), "end");
  s += text(kLeft + kPlotW / 2, kTop + kPlotH + 30, "test row");
  s += legend(kLeft + kPlotW - 150, kTop + 4, "#1f1f1f", "y_test");
  s += legend(kLeft + kPlotW - 150, kTop + 20, "#d62728", "y_model");
  s += "</svg>\n";
  return s;
}

std::string importance_bars(std::string_view title, std::span<const PfiEntry> entries,
                            std::size_t max_bars) {
  std::string s = open(title);
  const std::size_t n = std::min(max_bars, entries.size());
  double max_abs = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_abs = std::max(max_abs, std::abs(entries[i].r2_drop));
  if (!(max_abs > 0.0)) max_abs = 1.0;
  const double name_w = 200.0;
  const double zero_x = kLeft + name_w;
  const double span_w = kPlotW - name_w - 60.0;
  const double row_h = n > 0 ? std::min(24.0, kPlotH / static_cast<double>(n)) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const PfiEntry& e = entries[i];
    const double w = std::abs(e.r2_drop) / max_abs * span_w;
    const double y = kTop + row_h * static_cast<double>(i);
    const double x = e.r2_drop >= 0.0 ? zero_x : zero_x - w;
    s += "<rect class=\"bar\" data-feature=\"" + escape(e.feature) + "\" data-drop=\"" +
         label_num(e.r2_drop) + "\" x=\"" + num(x) + "\" y=\"" + num(y + 2) + "\" width=\"" +
         num(w) + "\" height=\"" + num(row_h - 4) + "\" fill=\"#4C72B0\"/>\n";
    s += text(zero_x - 6, y + row_h / 2 + 4, e.feature, "end");
    s += text(zero_x + w + 4, y + row_h / 2 + 4, label_num(e.r2_drop), "start");
  }
  s += text(kLeft + kPlotW / 2, kTop + kPlotH + 30, "R2 drop under permutation");
  s += "</svg>\n";
  return s;
}

}  // namespace featgate::svg
