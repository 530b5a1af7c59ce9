#pragma once

#include <span>
#include <string>
#include <vector>

namespace factorforge {

/// Horizontal bar chart, one bar per label, drawn in the given order.
std::string bar_chart_svg(const std::string& title, std::span<const std::string> labels,
                          std::span<const double> values);

/// Two-series line chart: `solid` as a solid polyline, `dashed` as a dashed one.
std::string line_chart_svg(const std::string& title, std::span<const std::string> x_labels,
                           const std::string& solid_name, std::span<const double> solid,
                           const std::string& dashed_name, std::span<const double> dashed);

}  // namespace factorforge
