#include "sdfm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "sdfm/errors.hpp"
#include "sdfm/io.hpp"

namespace sdfm {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 16.0;
constexpr double kTop = 32.0;
constexpr double kBottom = 44.0;

std::string escape_xml(const std::string& s) {
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

std::string num(double v, const char* fmt = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  void expand(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

}  // namespace

std::string palette_color(int i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
                                 "#17becf", "#ff7f0e"};
  return colors[i % 10];
}

LineChart::LineChart(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)) {}

void LineChart::add(SvgSeries series) { series_.push_back(std::move(series)); }

std::string LineChart::render() const {
  Range xr, yr;
  bool seen = false;
  for (const auto& s : series_) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!seen) {
        xr.lo = xr.hi = s.x[i];
        yr.lo = yr.hi = s.y[i];
        seen = true;
      } else {
        xr.expand(s.x[i]);
        yr.expand(s.y[i]);
      }
    }
  }
  if (!seen) {
    xr = {0.0, 1.0};
    yr = {0.0, 1.0};
  }
  if (xr.hi == xr.lo) {
    xr.lo -= 0.5;
    xr.hi += 0.5;
  }
  if (yr.hi == yr.lo) {
    yr.lo -= 0.5;
    yr.hi += 0.5;
  }
  const double ypad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= ypad;
  yr.hi += ypad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth, "%.0f") +
         "\" height=\"" + num(kHeight, "%.0f") + "\" viewBox=\"0 0 " +
         num(kWidth, "%.0f") + " " + num(kHeight, "%.0f") + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" + escape_xml(title_) +
         "</text>\n";

  // axes
  out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" +
         num(kLeft) + "\" y2=\"" + num(kHeight - kBottom) +
         "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kHeight - kBottom) +
         "\" x2=\"" + num(kWidth - kRight) + "\" y2=\"" + num(kHeight - kBottom) +
         "\" stroke=\"black\"/>\n";

  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / nticks;
    const double gx = px(fx);
    out += "<line x1=\"" + num(gx) + "\" y1=\"" + num(kHeight - kBottom) +
           "\" x2=\"" + num(gx) + "\" y2=\"" + num(kHeight - kBottom + 4) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(gx) + "\" y=\"" + num(kHeight - kBottom + 17) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\">" + num(fx, "%.4g") + "</text>\n";

    const double fy = yr.lo + (yr.hi - yr.lo) * i / nticks;
    const double gy = py(fy);
    out += "<line x1=\"" + num(kLeft - 4) + "\" y1=\"" + num(gy) + "\" x2=\"" +
           num(kLeft) + "\" y2=\"" + num(gy) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(kLeft - 7) + "\" y=\"" + num(gy + 3) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"10\">" + num(fy, "%.4g") + "</text>\n";
  }

  out += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" +
         num(kHeight - 8) + "\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(x_label_) +
         "</text>\n";
  out += "<text x=\"14\" y=\"" + num(kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 14 " + num(kTop + plot_h / 2) + ")\">" +
         escape_xml(y_label_) + "</text>\n";

  for (const auto& s : series_) {
    std::string points;
    const std::size_t count = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      points += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
    }
    if (!points.empty()) points.pop_back();
    out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"" +
           num(s.stroke_width, "%.2f") + "\" points=\"" + points + "\"";
    if (!s.label.empty()) {
      out += "><title>" + escape_xml(s.label) + "</title></polyline>\n";
    } else {
      out += "/>\n";
    }
  }

  out += "</svg>\n";
  return out;
}

void LineChart::write(const std::filesystem::path& path) const {
  atomic_write(path, render());
}

}  // namespace sdfm
