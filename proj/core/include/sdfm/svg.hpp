#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sdfm {

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double stroke_width = 1.0;
  std::string label;
};

// Minimal dependency-free SVG line chart. Output is fully deterministic:
// fixed viewport, fixed tick layout, no timestamps. NaN points are skipped.
class LineChart {
 public:
  LineChart(std::string title, std::string x_label, std::string y_label);

  void add(SvgSeries series);
  std::string render() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string title_, x_label_, y_label_;
  std::vector<SvgSeries> series_;
};

// Color for the i-th series of a multi-line chart.
std::string palette_color(int i);

}  // namespace sdfm
