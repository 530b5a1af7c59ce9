#include "factorforge/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "factorforge/error.hpp"

namespace factorforge {

namespace {

std::string escape(const std::string& s) {
  std::string out;
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

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string bar_chart_svg(const std::string& title, std::span<const std::string> labels,
                          std::span<const double> values) {
  if (labels.size() != values.size()) throw Error("bar chart: labels and values differ in length");
  const double label_w = 220, bar_w = 420, row_h = 22, top = 40;
  const double height = top + row_h * static_cast<double>(labels.size()) + 20;
  const double width = label_w + bar_w + 120;
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::fabs(v));
  if (vmax == 0.0) vmax = 1.0;

  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
       fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"10\" y=\"22\" font-size=\"15\">" + escape(title) + "</text>\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = top + row_h * static_cast<double>(i);
    const double w = bar_w * std::fabs(values[i]) / vmax;
    s += "<text x=\"" + fixed(label_w - 6) + "\" y=\"" + fixed(y + 15) + "\" text-anchor=\"end\">" +
         escape(labels[i]) + "</text>\n";
    s += "<rect x=\"" + fixed(label_w) + "\" y=\"" + fixed(y + 3) + "\" width=\"" + fixed(w) +
         "\" height=\"" + fixed(row_h - 6) + "\" fill=\"#1f77b4\"/>\n";
    char val[64];
    std::snprintf(val, sizeof val, "%.4g", values[i]);
    s += "<text x=\"" + fixed(label_w + w + 6) + "\" y=\"" + fixed(y + 15) + "\">" + val + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string line_chart_svg(const std::string& title, std::span<const std::string> x_labels,
                           const std::string& solid_name, std::span<const double> solid,
                           const std::string& dashed_name, std::span<const double> dashed) {
  if (solid.size() != dashed.size() || solid.size() != x_labels.size())
    throw Error("line chart: series lengths differ");
  const double width = 760, height = 420, left = 70, right = 20, top = 40, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  double lo = 0.0, hi = 0.0;
  for (double v : solid) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : dashed) lo = std::min(lo, v), hi = std::max(hi, v);
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const std::size_t n = solid.size();
  auto px = [&](std::size_t i) {
    return left + (n <= 1 ? plot_w / 2 : plot_w * static_cast<double>(i) / static_cast<double>(n - 1));
  };
  auto py = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };
  auto points = [&](std::span<const double> series) {
    std::string p;
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (i) p += ' ';
      p += fixed(px(i)) + ',' + fixed(py(series[i]));
    }
    return p;
  };

  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
       fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"10\" y=\"22\" font-size=\"15\">" + escape(title) + "</text>\n";
  s += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top + plot_h) + "\" x2=\"" +
       fixed(left + plot_w) + "\" y2=\"" + fixed(top + plot_h) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top) + "\" x2=\"" + fixed(left) +
       "\" y2=\"" + fixed(top + plot_h) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(py(0.0)) + "\" x2=\"" + fixed(left + plot_w) +
       "\" y2=\"" + fixed(py(0.0)) + "\" stroke=\"#bbbbbb\"/>\n";
  for (double v : {lo, hi}) {
    char val[64];
    std::snprintf(val, sizeof val, "%.3f", v);
    s += "<text x=\"" + fixed(left - 6) + "\" y=\"" + fixed(py(v) + 4) + "\" text-anchor=\"end\">" +
         val + "</text>\n";
  }
  if (n > 0) {
    s += "<text x=\"" + fixed(px(0)) + "\" y=\"" + fixed(top + plot_h + 18) + "\">" +
         escape(x_labels.front()) + "</text>\n";
    s += "<text x=\"" + fixed(px(n - 1)) + "\" y=\"" + fixed(top + plot_h + 18) +
         "\" text-anchor=\"end\">" + escape(x_labels.back()) + "</text>\n";
  }
  s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" + points(solid) +
       "\"/>\n";
  s += "<polyline fill=\"none\" stroke=\"#ff7f0e\" stroke-width=\"2\" stroke-dasharray=\"6,4\" points=\"" +
       points(dashed) + "\"/>\n";
  const double ly = height - 18;
  s += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(ly) + "\" x2=\"" + fixed(left + 30) +
       "\" y2=\"" + fixed(ly) + "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  s += "<text x=\"" + fixed(left + 36) + "\" y=\"" + fixed(ly + 4) + "\">" + escape(solid_name) +
       "</text>\n";
  s += "<line x1=\"" + fixed(left + 220) + "\" y1=\"" + fixed(ly) + "\" x2=\"" + fixed(left + 250) +
       "\" y2=\"" + fixed(ly) + "\" stroke=\"#ff7f0e\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
  s += "<text x=\"" + fixed(left + 256) + "\" y=\"" + fixed(ly + 4) + "\">" + escape(dashed_name) +
       "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace factorforge
