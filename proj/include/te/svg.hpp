#pragma once

#include <string>
#include <utility>
#include <vector>

namespace te::svg {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Static line chart with linear axes; y spans [y_min, y_max].
std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, double y_min = 0.0, double y_max = 1.0);

/// Vertical bars, one per label; y spans [0, y_max].
std::string bar_chart(const std::string& title, const std::string& y_label, const std::vector<std::string>& labels,
                      const std::vector<double>& values, double y_max = 1.0);

}  // namespace te::svg
