#pragma once

#include <algorithm>
#include <string>

#include "crashlab/csv.hpp"
#include "crashlab/descriptive.hpp"
#include "crashlab/error.hpp"

namespace crashlab {

struct ChartStyle {
  int width = 640;
  int height = 300;
  std::string title;
  std::string bar_fill = "#4878a8";
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// One rect per bin, bars in bin order, fixed 2-decimal coordinates so equal
// tables render to equal bytes. Bars are the only rect elements.
inline std::string render_svg_bar(const CountTable& t, const ChartStyle& style = {}) {
  if (t.bins.empty()) throw Error(Errc::EmptyTable, "no bins to draw");
  if (style.width < 120 || style.height < 80)
    throw Error(Errc::DomainError, "chart too small to lay out");

  const double left = 46.0, right = 12.0, bottom = 36.0;
  const double top = style.title.empty() ? 14.0 : 32.0;
  const double plot_w = style.width - left - right;
  const double plot_h = style.height - top - bottom;
  const long max_count = std::max(1L, *std::max_element(t.counts.begin(), t.counts.end()));
  const double slot = plot_w / static_cast<double>(t.bins.size());
  const double bar_w = slot * 0.8;

  const auto num = [](double v) { return detail::fmt_fixed(v, 2); };
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) +
         "\" height=\"" + std::to_string(style.height) + "\" viewBox=\"0 0 " +
         std::to_string(style.width) + " " + std::to_string(style.height) + "\">\n";
  svg += "<style>text{font-family:sans-serif;fill:#333}</style>\n";
  if (!style.title.empty())
    svg += "<text x=\"" + num(left + plot_w / 2.0) +
           "\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">" +
           detail::xml_escape(style.title) + "</text>\n";

  // Axes and the three y ticks (0, mid, max).
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) +
         "\" y2=\"" + num(top + plot_h) + "\" stroke=\"#999\"/>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + plot_h) + "\" x2=\"" +
         num(left + plot_w) + "\" y2=\"" + num(top + plot_h) + "\" stroke=\"#999\"/>\n";
  for (int k = 0; k <= 2; ++k) {
    const double frac = static_cast<double>(k) / 2.0;
    const double y = top + plot_h * (1.0 - frac);
    const double value = frac * static_cast<double>(max_count);
    svg += "<line x1=\"" + num(left - 4.0) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left) +
           "\" y2=\"" + num(y) + "\" stroke=\"#999\"/>\n";
    svg += "<text x=\"" + num(left - 7.0) + "\" y=\"" + num(y + 3.5) +
           "\" font-size=\"10\" text-anchor=\"end\">" +
           (k == 1 ? detail::fmt_fixed(value, 1) : std::to_string(max_count * k / 2)) +
           "</text>\n";
  }

  const bool crowded = t.bins.size() > 14;
  for (std::size_t i = 0; i < t.bins.size(); ++i) {
    const double h = plot_h * static_cast<double>(t.counts[i]) / static_cast<double>(max_count);
    const double x = left + slot * static_cast<double>(i) + (slot - bar_w) / 2.0;
    const double y = top + plot_h - h;
    svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(bar_w) +
           "\" height=\"" + num(h) + "\" fill=\"" + style.bar_fill + "\"/>\n";
    const double cx = left + slot * (static_cast<double>(i) + 0.5);
    const std::string label = detail::xml_escape(t.bins[i]);
    if (crowded) {
      svg += "<text x=\"" + num(cx) + "\" y=\"" + num(top + plot_h + 12.0) +
             "\" font-size=\"8\" text-anchor=\"end\" transform=\"rotate(-45 " + num(cx) + " " +
             num(top + plot_h + 12.0) + ")\">" + label + "</text>\n";
    } else {
      svg += "<text x=\"" + num(cx) + "\" y=\"" + num(top + plot_h + 14.0) +
             "\" font-size=\"9\" text-anchor=\"middle\">" + label + "</text>\n";
    }
  }
  svg += "<text x=\"" + num(left + plot_w / 2.0) + "\" y=\"" +
         num(static_cast<double>(style.height) - 6.0) +
         "\" font-size=\"10\" text-anchor=\"middle\">" + detail::xml_escape(t.dimension) +
         "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace crashlab
