// Copyright 2026 The lpn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lpn/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lpn/error.hpp"

namespace lpn {

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kLeft = 62.0, kRight = 18.0, kTop = 34.0, kBottom = 44.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void header(std::ostringstream& svg, const std::string& title) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << escape(title) << "</text>\n";
}

struct Range {
  double lo = 0.0, hi = 1.0;
  double map(double v, double a, double b) const {
    if (hi == lo) return 0.5 * (a + b);
    return a + (v - lo) / (hi - lo) * (b - a);
  }
};

void axes(std::ostringstream& svg, const Range& xr, const Range& yr, const std::string& x_label,
          const std::string& y_label) {
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
      << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double x = kLeft + f * (kWidth - kLeft - kRight);
    const double y = kHeight - kBottom - f * (kHeight - kTop - kBottom);
    svg << "<text x=\"" << fmt(x) << "\" y=\"" << kHeight - kBottom + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt_tick(xr.lo + f * (xr.hi - xr.lo)) << "</text>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(y + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt_tick(yr.lo + f * (yr.hi - yr.lo)) << "</text>\n";
  }
  svg << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape(x_label) << "</text>\n";
  svg << "<text x=\"14\" y=\"" << (kTop + kHeight - kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 14 " << (kTop + kHeight - kBottom) / 2 << ")\">"
      << escape(y_label) << "</text>\n";
}

}  // namespace

std::string render_line_chart(const std::vector<Series>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label) {
  if (series.empty()) throw ArgumentError("render_line_chart: no series");
  Range xr{1e300, -1e300}, yr{1e300, -1e300};
  for (const Series& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty()) {
      throw ArgumentError("render_line_chart: series '" + s.label + "' is empty or ragged");
    }
    for (double v : s.x) {
      xr.lo = std::min(xr.lo, v);
      xr.hi = std::max(xr.hi, v);
    }
    for (double v : s.y) {
      yr.lo = std::min(yr.lo, v);
      yr.hi = std::max(yr.hi, v);
    }
  }
  if (yr.hi == yr.lo) {
    yr.lo -= 1.0;
    yr.hi += 1.0;
  }

  std::ostringstream svg;
  header(svg, title);
  axes(svg, xr, yr, x_label, y_label);
  for (size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 8]
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t k = 0; k < s.x.size(); ++k) {
      if (k) svg << " ";
      svg << fmt(xr.map(s.x[k], kLeft, kWidth - kRight)) << ","
          << fmt(yr.map(s.y[k], kHeight - kBottom, kTop));
    }
    svg << "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(i);
    svg << "<line x1=\"" << kWidth - kRight - 130 << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << kWidth - kRight - 112 << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << kPalette[i % 8]
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kWidth - kRight - 108 << "\" y=\"" << fmt(ly + 3)
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_bar_chart(const std::vector<std::string>& labels, const Vec& values,
                             const std::string& title) {
  if (labels.empty() || labels.size() != values.size()) {
    throw ArgumentError("render_bar_chart: labels/values empty or mismatched");
  }
  Range yr{0.0, -1e300};
  for (double v : values) {
    yr.lo = std::min(yr.lo, v);
    yr.hi = std::max(yr.hi, v);
  }
  if (yr.hi <= yr.lo) yr.hi = yr.lo + 1.0;

  std::ostringstream svg;
  header(svg, title);
  axes(svg, Range{0.0, static_cast<double>(labels.size())}, yr, "", "value");
  const double span = kWidth - kLeft - kRight;
  const double slot = span / static_cast<double>(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    const double x = kLeft + slot * (static_cast<double>(i) + 0.2);
    const double y0 = yr.map(0.0, kHeight - kBottom, kTop);
    const double y1 = yr.map(values[i], kHeight - kBottom, kTop);
    svg << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(std::min(y0, y1)) << "\" width=\""
        << fmt(slot * 0.6) << "\" height=\"" << fmt(std::abs(y0 - y1)) << "\" fill=\""
        << kPalette[i % 8] << "\"/>\n";
    svg << "<text x=\"" << fmt(x + slot * 0.3) << "\" y=\"" << kHeight - kBottom + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">"
        << escape(labels[i]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace lpn
