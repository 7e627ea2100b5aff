#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "infogeo/common.hpp"
#include "infogeo/gridscan.hpp"
#include "infogeo/linalg.hpp"

namespace infogeo {

/// Point marker for the figure (truth, MLE).
struct FigureMarker {
  double x = 0.0;
  double y = 0.0;
  std::string color;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Diverging blue-white-red map on [-1, 1]; NaN renders grey.
inline std::string diverging_color(double t) {
  if (!std::isfinite(t)) return "#bdbdbd";
  t = std::clamp(t, -1.0, 1.0);
  const int lo[3] = {33, 102, 172};
  const int mid[3] = {247, 247, 247};
  const int hi[3] = {178, 24, 43};
  int rgb[3];
  for (int c = 0; c < 3; ++c) {
    const double u = std::abs(t);
    const int* end = t < 0 ? lo : hi;
    rgb[c] = static_cast<int>(std::lround(mid[c] + u * (end[c] - mid[c])));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace detail

/// Renders a heatmap of the grid with optional contour and geodesic
/// polylines and point markers. Pure text emission; identical inputs
/// give identical bytes.
inline std::string render_svg(const ScalarGrid& grid,
                              const std::vector<Matrix>& polylines,
                              const std::vector<std::string>& polyline_colors,
                              const std::vector<FigureMarker>& markers) {
  const double margin_l = 70, margin_r = 20, margin_t = 20, margin_b = 50;
  const double plot_w = 600, plot_h = 600;
  const double width = margin_l + plot_w + margin_r;
  const double height = margin_t + plot_h + margin_b;

  const double x_lo = grid.axis1.lo, x_hi = grid.axis1.hi;
  const double y_lo = grid.axis2.lo, y_hi = grid.axis2.hi;
  auto px = [&](double x) { return margin_l + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return margin_t + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  double vmax = 0.0;
  for (double v : grid.values.data())
    if (std::isfinite(v)) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) vmax = 1.0;

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<!-- infogeo " + std::string(kVersion) + " -->\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) +
       "\" height=\"" + detail::svg_num(height) + "\" viewBox=\"0 0 " +
       detail::svg_num(width) + " " + detail::svg_num(height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + detail::svg_num(width) + "\" height=\"" +
       detail::svg_num(height) + "\" fill=\"white\"/>\n";

  const double cw = plot_w / (grid.axis1.resolution - 1);
  const double ch = plot_h / (grid.axis2.resolution - 1);
  for (int i = 0; i < grid.axis1.resolution; ++i)
    for (int j = 0; j < grid.axis2.resolution; ++j) {
      const double v = grid.values(static_cast<std::size_t>(i),
                                   static_cast<std::size_t>(j));
      const double cx = px(axis_point(grid.axis1, i));
      const double cy = py(axis_point(grid.axis2, j));
      s += "<rect x=\"" + detail::svg_num(cx - cw / 2) + "\" y=\"" +
           detail::svg_num(cy - ch / 2) + "\" width=\"" + detail::svg_num(cw) +
           "\" height=\"" + detail::svg_num(ch) + "\" fill=\"" +
           detail::diverging_color(v / vmax) + "\"/>\n";
    }

  for (std::size_t p = 0; p < polylines.size(); ++p) {
    const Matrix& line = polylines[p];
    if (line.rows() < 2) continue;
    s += "<polyline fill=\"none\" stroke=\"" + polyline_colors[p] +
         "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < line.rows(); ++i) {
      if (i) s += ' ';
      s += detail::svg_num(px(line(i, 0))) + "," + detail::svg_num(py(line(i, 1)));
    }
    s += "\"/>\n";
  }

  for (const auto& m : markers)
    s += "<circle cx=\"" + detail::svg_num(px(m.x)) + "\" cy=\"" +
         detail::svg_num(py(m.y)) + "\" r=\"5\" fill=\"" + m.color + "\"/>\n";

  // Axis frame and labels.
  s += "<rect x=\"" + detail::svg_num(margin_l) + "\" y=\"" + detail::svg_num(margin_t) +
       "\" width=\"" + detail::svg_num(plot_w) + "\" height=\"" +
       detail::svg_num(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + detail::svg_num(margin_l + plot_w / 2) + "\" y=\"" +
       detail::svg_num(height - 12) + "\" text-anchor=\"middle\" font-size=\"14\">" +
       grid.axis1.name + "</text>\n";
  s += "<text x=\"16\" y=\"" + detail::svg_num(margin_t + plot_h / 2) +
       "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 " +
       detail::svg_num(margin_t + plot_h / 2) + ")\">" + grid.axis2.name + "</text>\n";
  s += "<text x=\"" + detail::svg_num(margin_l) + "\" y=\"" +
       detail::svg_num(height - 32) + "\" font-size=\"11\">" + detail::svg_num(x_lo) +
       "</text>\n";
  s += "<text x=\"" + detail::svg_num(margin_l + plot_w) + "\" y=\"" +
       detail::svg_num(height - 32) + "\" text-anchor=\"end\" font-size=\"11\">" +
       detail::svg_num(x_hi) + "</text>\n";
  s += "<text x=\"" + detail::svg_num(margin_l - 6) + "\" y=\"" +
       detail::svg_num(margin_t + plot_h) + "\" text-anchor=\"end\" font-size=\"11\">" +
       detail::svg_num(y_lo) + "</text>\n";
  s += "<text x=\"" + detail::svg_num(margin_l - 6) + "\" y=\"" +
       detail::svg_num(margin_t + 10) + "\" text-anchor=\"end\" font-size=\"11\">" +
       detail::svg_num(y_hi) + "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace infogeo
