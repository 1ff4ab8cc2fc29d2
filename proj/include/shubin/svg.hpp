#pragma once

#include <string>
#include <utility>
#include <vector>

namespace shubin::svg {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  std::string color = "#1f77b4";
  bool dashed = false;
  bool markers = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

/// Polylines on linear or base-10 log axes. Points that are not finite, or not
/// positive on a log axis, are dropped.
std::string render(const Plot& plot, int width = 640, int height = 420);

}  // namespace shubin::svg
