#pragma once

// Minimal standalone SVG figures: a heat map for coupling maps and a line
// plot for population traces.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pingpong/errors.hpp"

namespace pingpong::io {

namespace detail {

inline std::string fmt(double x, const char* f = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Perceptually ordered dark-blue -> yellow ramp.
inline std::string ramp(double u) {
  u = std::clamp(u, 0.0, 1.0);
  static const double stops[5][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  const double x = u * 4.0;
  const int i = std::min(3, static_cast<int>(x));
  const double f = x - i;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

inline const char* palette(std::size_t i) {
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colours[i % 10];
}

inline void save(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace detail

/// Heat map of `values` (rows drawn bottom to top), linear colour scale from 0 to the maximum.
inline std::string heatmap_svg(const Eigen::MatrixXd& values, const std::string& title,
                               const std::string& row_label, const std::string& col_label) {
  const int rows = static_cast<int>(values.rows());
  const int cols = static_cast<int>(values.cols());
  const double cell = std::clamp(480.0 / std::max({rows, cols, 1}), 2.0, 24.0);
  const double left = 60, top = 40, w = cols * cell, h = rows * cell;
  const double vmax = values.size() ? values.maxCoeff() : 0.0;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(left + w + 110) << "\" height=\""
    << detail::fmt(top + h + 50) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<text x=\"" << detail::fmt(left) << "\" y=\"20\" font-size=\"14\">" << detail::escape(title) << "</text>\n";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double u = vmax > 0.0 ? values(r, c) / vmax : 0.0;
      s << "<rect x=\"" << detail::fmt(left + c * cell) << "\" y=\"" << detail::fmt(top + h - (r + 1) * cell)
        << "\" width=\"" << detail::fmt(cell) << "\" height=\"" << detail::fmt(cell) << "\" fill=\""
        << detail::ramp(u) << "\"/>\n";
    }
  }
  s << "<text x=\"" << detail::fmt(left + w / 2) << "\" y=\"" << detail::fmt(top + h + 30)
    << "\" text-anchor=\"middle\">" << detail::escape(col_label) << "</text>\n";
  s << "<text x=\"20\" y=\"" << detail::fmt(top + h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << detail::fmt(top + h / 2) << ")\">" << detail::escape(row_label) << "</text>\n";
  // Colour bar.
  const double bx = left + w + 20;
  for (int i = 0; i < 50; ++i) {
    s << "<rect x=\"" << detail::fmt(bx) << "\" y=\"" << detail::fmt(top + h - (i + 1) * h / 50)
      << "\" width=\"14\" height=\"" << detail::fmt(h / 50 + 0.5) << "\" fill=\"" << detail::ramp((i + 0.5) / 50)
      << "\"/>\n";
  }
  s << "<text x=\"" << detail::fmt(bx + 18) << "\" y=\"" << detail::fmt(top + 10) << "\">" << detail::fmt(vmax, "%.3g")
    << "</text>\n";
  s << "<text x=\"" << detail::fmt(bx + 18) << "\" y=\"" << detail::fmt(top + h) << "\">0</text>\n";
  s << "</svg>\n";
  return s.str();
}

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

inline std::string line_plot_svg(const std::vector<Series>& series, const std::string& title,
                                 const std::string& x_label, const std::string& y_label) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = 0.0, y1 = 1.0;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!(x1 > x0)) x0 = 0.0, x1 = 1.0;
  const double left = 60, top = 40, w = 560, h = 320;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
  auto py = [&](double y) { return top + h - (y - y0) / (y1 - y0) * h; };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(left + w + 160) << "\" height=\""
    << detail::fmt(top + h + 50) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<text x=\"" << detail::fmt(left) << "\" y=\"20\" font-size=\"14\">" << detail::escape(title) << "</text>\n";
  s << "<rect x=\"" << detail::fmt(left) << "\" y=\"" << detail::fmt(top) << "\" width=\"" << detail::fmt(w)
    << "\" height=\"" << detail::fmt(h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    s << "<text x=\"" << detail::fmt(px(xv)) << "\" y=\"" << detail::fmt(top + h + 15) << "\" text-anchor=\"middle\">"
      << detail::fmt(xv, "%.3g") << "</text>\n";
    s << "<text x=\"" << detail::fmt(left - 5) << "\" y=\"" << detail::fmt(py(yv) + 4) << "\" text-anchor=\"end\">"
      << detail::fmt(yv, "%.2g") << "</text>\n";
  }
  s << "<text x=\"" << detail::fmt(left + w / 2) << "\" y=\"" << detail::fmt(top + h + 40)
    << "\" text-anchor=\"middle\">" << detail::escape(x_label) << "</text>\n";
  s << "<text x=\"15\" y=\"" << detail::fmt(top + h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
    << detail::fmt(top + h / 2) << ")\">" << detail::escape(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& ser = series[k];
    s << "<polyline fill=\"none\" stroke=\"" << detail::palette(k) << "\" stroke-width=\"1.5\""
      << (ser.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
      s << detail::fmt(px(ser.x[i]), "%.2f") << ',' << detail::fmt(py(ser.y[i]), "%.2f") << ' ';
    }
    s << "\"/>\n";
    const double ly = top + 10 + 16 * static_cast<double>(k);
    s << "<line x1=\"" << detail::fmt(left + w + 10) << "\" y1=\"" << detail::fmt(ly) << "\" x2=\""
      << detail::fmt(left + w + 30) << "\" y2=\"" << detail::fmt(ly) << "\" stroke=\"" << detail::palette(k) << "\""
      << (ser.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
    s << "<text x=\"" << detail::fmt(left + w + 35) << "\" y=\"" << detail::fmt(ly + 4) << "\">"
      << detail::escape(ser.label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

inline void write_svg(const std::filesystem::path& path, const std::string& svg) { detail::save(path, svg); }

}  // namespace pingpong::io
