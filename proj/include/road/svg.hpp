#pragma once

#include <string>
#include <vector>

namespace road::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG document with every series drawn on log-log axes:
/// markers joined by lines, decade ticks, a legend in the top right.
/// Points with a nonpositive coordinate cannot be placed on a log axis and
/// are dropped.
std::string loglog_plot(const std::vector<Series>& series, const std::string& x_label,
                        const std::string& y_label, const std::string& title);

}  // namespace road::svg
