#pragma once

#include <optional>
#include <string>
#include <vector>

namespace crisis::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<std::optional<double>> y;  // gaps break the line
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::optional<double> y_min;  // fixed axis range; data range otherwise
  std::optional<double> y_max;
  bool integer_ticks = false;   // one tick per integer (level charts)
  bool invert_y = false;        // smaller values drawn higher
  double width = 720;
  double height = 400;
};

// Standalone SVG document; output depends only on the chart contents.
std::string render(const LineChart& chart);

}  // namespace crisis::svg
