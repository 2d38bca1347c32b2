#include "coldoc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace coldoc {

namespace {

struct Rgb {
  int r, g, b;
};

/// Diverging ramp pinned to the score range: blue (-1) -> white (0) -> red (+1).
Rgb ramp(double v) {
  v = std::clamp(v, -1.0, 1.0);
  auto mix = [](int from, int to, double t) {
    return static_cast<int>(std::lround(from + (to - from) * t));
  };
  if (v < 0.0) {
    double t = -v;
    return {mix(255, 33, t), mix(255, 102, t), mix(255, 172, t)};
  }
  double t = v;
  return {mix(255, 178, t), mix(255, 24, t), mix(255, 43, t)};
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string svg_heatmap(const std::vector<std::vector<double>>& matrix,
                        const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::string& title) {
  std::size_t rows = matrix.size();
  std::size_t cols = rows ? matrix[0].size() : 0;
  const int cell = 48;
  const int left = 110, top = 60;
  int width = left + int(cols) * cell + 20;
  int height = top + int(rows) * cell + 30;
  bool print_values = rows <= 24 && cols <= 24;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"monospace\" font-size=\"11\">\n";
  svg << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "  <text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";

  for (std::size_t j = 0; j < cols; ++j) {
    std::string label = j < col_labels.size() ? col_labels[j] : std::to_string(j);
    svg << "  <text x=\"" << left + int(j) * cell + cell / 2 << "\" y=\"" << top - 8
        << "\" text-anchor=\"middle\">" << xml_escape(label) << "</text>\n";
  }
  for (std::size_t i = 0; i < rows; ++i) {
    std::string label = i < row_labels.size() ? row_labels[i] : std::to_string(i);
    svg << "  <text x=\"" << left - 8 << "\" y=\"" << top + int(i) * cell + cell / 2 + 4
        << "\" text-anchor=\"end\">" << xml_escape(label) << "</text>\n";
    for (std::size_t j = 0; j < matrix[i].size(); ++j) {
      Rgb c = ramp(matrix[i][j]);
      int x = left + int(j) * cell, y = top + int(i) * cell;
      svg << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\""
          << cell << "\" fill=\"rgb(" << c.r << "," << c.g << "," << c.b
          << ")\" stroke=\"#ccc\"/>\n";
      if (print_values) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.2f", matrix[i][j]);
        bool dark = std::fabs(matrix[i][j]) > 0.6;
        svg << "  <text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
            << "\" text-anchor=\"middle\" fill=\"" << (dark ? "white" : "#333") << "\">" << buf
            << "</text>\n";
      }
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace coldoc
