// SPDX-License-Identifier: Apache-2.0
//
// Minimal deterministic SVG output for the five report figures. Layout is a
// pure function of the report tables; all coordinates are printed with fixed
// precision.
#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mcprisk/error.hpp"
#include "mcprisk/io.hpp"
#include "mcprisk/report.hpp"
#include "mcprisk/table.hpp"

namespace mcprisk::report {

namespace {

constexpr std::string_view kFont = "font-family=\"sans-serif\"";
constexpr std::string_view kPalette[] = {"#4c78a8", "#f58518", "#54a24b", "#e45756", "#b279a2"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out.push_back(c);
    }
  }
  return out;
}

class Svg {
public:
  Svg(double width, double height) : w_(width), h_(height) {}

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view extra = {}) {
    body_ += fmt::format("  <rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"{}{}/>\n",
                         x, y, w, h, fill, extra.empty() ? "" : " ", extra);
  }
  void line(double x1, double y1, double x2, double y2, std::string_view stroke = "#333333") {
    body_ += fmt::format("  <line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\"/>\n", x1, y1,
                         x2, y2, stroke);
  }
  void circle(double cx, double cy, double r, std::string_view fill) {
    body_ += fmt::format("  <circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\" fill-opacity=\"0.8\"/>\n",
                         cx, cy, r, fill);
  }
  void text(double x, double y, std::string_view s, std::string_view anchor = "middle", int size = 11,
            std::string_view transform = {}) {
    std::string t = transform.empty() ? "" : fmt::format(" transform=\"{}\"", transform);
    body_ += fmt::format("  <text x=\"{:.2f}\" y=\"{:.2f}\" {} font-size=\"{}\" text-anchor=\"{}\"{}>{}</text>\n", x,
                         y, kFont, size, anchor, t, escape(s));
  }
  std::string str() const {
    return fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
                       "viewBox=\"0 0 {:.0f} {:.0f}\">\n  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
                       "{}</svg>\n",
                       w_, h_, w_, h_, body_);
  }

private:
  double w_, h_;
  std::string body_;
};

table::Table load(const std::filesystem::path& dir, std::string_view stem) {
  auto path = dir / fmt::format("{}.csv", stem);
  if (!std::filesystem::is_regular_file(path))
    throw Error(ErrorKind::Io, fmt::format("missing report file {}", path.string()));
  return table::parse(io::read_file(path));
}

double cell_real(const table::Table& t, const table::Row& row, std::string_view col) {
  return table::to_real(row[t.column(col)], col);
}

/// Rounds the axis maximum up to a 1/2/5 step so tick labels are short.
double nice_max(double v) {
  if (v <= 0.0)
    return 1.0;
  double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (double step : {1.0, 2.0, 5.0, 10.0})
    if (v <= step * mag)
      return step * mag;
  return 10.0 * mag;
}

std::string tick_label(double v) {
  return std::abs(v - std::round(v)) < 1e-9 ? fmt::format("{:.0f}", v) : fmt::format("{:.1f}", v);
}

/// Axes with five horizontal grid lines; returns nothing, draws into `svg`.
void y_axis(Svg& svg, double left, double top, double right, double bottom, double max, std::string_view label) {
  for (int i = 0; i <= 5; ++i) {
    double v = max * i / 5.0;
    double y = bottom - (bottom - top) * i / 5.0;
    svg.line(left, y, right, y, i == 0 ? "#333333" : "#dddddd");
    svg.text(left - 6, y + 4, tick_label(v), "end", 10);
  }
  svg.line(left, top, left, bottom);
  svg.text(16, (top + bottom) / 2, label, "middle", 11, fmt::format("rotate(-90 16 {:.2f})", (top + bottom) / 2));
}

std::string bar_chart(const table::Table& t) {
  const double n = static_cast<double>(t.rows.size());
  const double left = 70, top = 40, bottom = 300, slot = 36;
  const double width = left + std::max(1.0, n) * slot + 30;
  Svg svg(width, 380);
  svg.text(width / 2, 22, "Findings per CWE", "middle", 14);
  double max = 0;
  for (const auto& row : t.rows)
    max = std::max(max, cell_real(t, row, "frequency"));
  max = nice_max(max);
  y_axis(svg, left, top, width - 30, bottom, max, "findings");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    double v = cell_real(t, row, "frequency");
    double h = (bottom - top) * v / max;
    double x = left + i * slot + 6;
    svg.rect(x, bottom - h, slot - 12, h, kPalette[0]);
    double cx = x + (slot - 12) / 2;
    svg.text(cx, bottom - h - 4, tick_label(v), "middle", 9);
    svg.text(cx, bottom + 14, fmt::format("CWE-{}", row[t.column("cwe_id")]), "end", 10,
             fmt::format("rotate(-45 {:.2f} {:.2f})", cx, bottom + 14));
  }
  return svg.str();
}

std::string band_color(std::string_view band) {
  static constexpr std::pair<std::string_view, std::string_view> colors[] = {
      {"VeryLow", "#2c7bb6"}, {"Low", "#abd9e9"}, {"Medium", "#fdae61"}, {"High", "#f46d43"}, {"VeryHigh", "#d7191c"}};
  for (auto [b, c] : colors)
    if (b == band)
      return std::string(c);
  return "#999999";
}

std::string scatter(const table::Table& t) {
  const double left = 70, top = 40, right = 520, bottom = 340;
  Svg svg(560, 390);
  svg.text(280, 22, "Finding volume against RMS severity", "middle", 14);
  double xmax = 1, ymax = 1;
  for (const auto& row : t.rows) {
    xmax = std::max(xmax, cell_real(t, row, "N_r"));
    ymax = std::max(ymax, cell_real(t, row, "rms"));
  }
  xmax = nice_max(xmax);
  ymax = nice_max(ymax);
  y_axis(svg, left, top, right, bottom, ymax, "RMS severity");
  for (int i = 0; i <= 5; ++i) {
    double x = left + (right - left) * i / 5.0;
    svg.line(x, bottom, x, bottom + 4);
    svg.text(x, bottom + 16, tick_label(xmax * i / 5.0), "middle", 10);
  }
  svg.text((left + right) / 2, bottom + 34, "findings (N_r)", "middle", 11);
  for (const auto& row : t.rows) {
    double x = left + (right - left) * cell_real(t, row, "N_r") / xmax;
    double y = bottom - (bottom - top) * cell_real(t, row, "rms") / ymax;
    double r = 3.0 + cell_real(t, row, "normalized") / 20.0;
    svg.circle(x, y, r, band_color(row[t.column("band")]));
  }
  return svg.str();
}

std::string grouped_bars(const table::Table& t) {
  const double left = 70, top = 50, bottom = 300, slot = 90;
  const double width = left + slot * std::max<std::size_t>(1, t.rows.size()) + 30;
  Svg svg(width, 360);
  svg.text(width / 2, 22, "Share of findings and exposure by surface", "middle", 14);
  y_axis(svg, left, top, width - 30, bottom, 100.0, "percent");
  svg.rect(width - 200, 30, 10, 10, kPalette[0]);
  svg.text(width - 185, 39, "findings", "start", 10);
  svg.rect(width - 120, 30, 10, 10, kPalette[1]);
  svg.text(width - 105, 39, "exposure", "start", 10);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    double x = left + i * slot + 12;
    const double bw = (slot - 24) / 2;
    double values[] = {cell_real(t, row, "finding_share"), cell_real(t, row, "exposure_share")};
    for (int k = 0; k < 2; ++k) {
      double h = (bottom - top) * values[k] / 100.0;
      svg.rect(x + k * bw, bottom - h, bw - 2, h, kPalette[k]);
      svg.text(x + k * bw + bw / 2 - 1, bottom - h - 4, fmt::format("{:.1f}", values[k]), "middle", 9);
    }
    svg.text(x + bw, bottom + 16, row[t.column("surface")], "middle", 11);
  }
  return svg.str();
}

std::string histogram(const table::Table& t) {
  static constexpr std::string_view order[] = {"VeryLow", "Low", "Medium", "High", "VeryHigh"};
  std::map<std::string, double> counts;
  for (const auto& row : t.rows)
    counts[row[t.column("band")]] = cell_real(t, row, "count");
  const double left = 70, top = 40, bottom = 300, slot = 80;
  Svg svg(left + slot * 5 + 30, 350);
  svg.text((left + slot * 5 + 30) / 2, 22, "Repositories per risk band", "middle", 14);
  double max = 1;
  for (auto& [b, c] : counts)
    max = std::max(max, c);
  max = nice_max(max);
  y_axis(svg, left, top, left + slot * 5, bottom, max, "repositories");
  for (std::size_t i = 0; i < 5; ++i) {
    double v = counts.contains(std::string(order[i])) ? counts[std::string(order[i])] : 0.0;
    double h = (bottom - top) * v / max;
    double x = left + i * slot + 8;
    svg.rect(x, bottom - h, slot - 16, h, band_color(order[i]));
    svg.text(x + (slot - 16) / 2, bottom - h - 4, tick_label(v), "middle", 10);
    svg.text(x + (slot - 16) / 2, bottom + 16, order[i], "middle", 11);
  }
  return svg.str();
}

std::string heat_grid(const table::Table& t) {
  const double left = 100, top = 70, cell = 80;
  const std::size_t n = t.rows.size();
  Svg svg(left + cell * n + 30, top + cell * n + 40);
  svg.text((left + cell * n) / 2 + 15, 22, "P(column surface | row surface), percent", "middle", 14);
  for (std::size_t j = 0; j < n; ++j)
    svg.text(left + cell * j + cell / 2, top - 10, t.header[j + 1], "middle", 11);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = t.rows[i];
    svg.text(left - 8, top + cell * i + cell / 2 + 4, row[0], "end", 11);
    for (std::size_t j = 0; j < n; ++j) {
      double x = left + cell * j, y = top + cell * i;
      const std::string& raw = row[j + 1];
      if (raw.empty()) {
        svg.rect(x, y, cell, cell, "#eeeeee", "stroke=\"white\"");
        svg.text(x + cell / 2, y + cell / 2 + 4, "n/a", "middle", 12);
        continue;
      }
      double v = table::to_real(raw, t.header[j + 1]);
      int shade = static_cast<int>(std::lround(255.0 - 2.0 * std::clamp(v, 0.0, 100.0)));
      svg.rect(x, y, cell, cell, fmt::format("#ff{:02x}{:02x}", shade, shade), "stroke=\"white\"");
      svg.text(x + cell / 2, y + cell / 2 + 5, fmt::format("{:.0f}", v), "middle", 14);
    }
  }
  return svg.str();
}

} // namespace

std::vector<std::filesystem::path> render_charts(const std::filesystem::path& report_dir,
                                                 const std::filesystem::path& out_dir) {
  // Load everything first so a missing file leaves no partial chart set.
  const auto freq = load(report_dir, kCweFrequency);
  const auto scat = load(report_dir, kRepoScatter);
  const auto shares = load(report_dir, kSurfaceShares);
  const auto bands = load(report_dir, kBandDistribution);
  const auto matrix = load(report_dir, kCooccurrence);

  const std::pair<std::string_view, std::string> charts[] = {
      {kCweFrequency, bar_chart(freq)},       {kRepoScatter, scatter(scat)},
      {kSurfaceShares, grouped_bars(shares)}, {kBandDistribution, histogram(bands)},
      {kCooccurrence, heat_grid(matrix)},
  };
  std::vector<std::filesystem::path> out;
  for (const auto& [stem, svg] : charts) {
    auto path = out_dir / fmt::format("{}.svg", stem);
    io::write_file(path, svg);
    out.push_back(std::move(path));
  }
  return out;
}

} // namespace mcprisk::report
