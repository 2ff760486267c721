#include "kgan/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kgan/error.hpp"

namespace kgan::svg {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

// Viridis-like ramp through five anchors.
std::string ramp(double t) {
  static constexpr double anchors[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * 4.0;
  const int i = std::min(static_cast<int>(t), 3);
  const double f = t - i;
  char buf[32];
  std::snprintf(buf, sizeof buf, "rgb(%d,%d,%d)",
                static_cast<int>(std::lround(anchors[i][0] + f * (anchors[i + 1][0] - anchors[i][0]))),
                static_cast<int>(std::lround(anchors[i][1] + f * (anchors[i + 1][1] - anchors[i][1]))),
                static_cast<int>(std::lround(anchors[i][2] + f * (anchors[i + 1][2] - anchors[i][2]))));
  return buf;
}

}  // namespace

std::string scatter(const std::vector<Series>& series, const std::string& title, std::optional<Bounds> bounds,
                    int size) {
  for (const Series& s : series) {
    if (s.points.rank() != 2 || s.points.cols() != 2) throw ShapeError("svg scatter: points must be n x 2");
  }
  if (!bounds) {
    Bounds b{INFINITY, -INFINITY, INFINITY, -INFINITY};
    for (const Series& s : series) {
      for (std::size_t i = 0; i < s.points.rows(); ++i) {
        b.x_min = std::min(b.x_min, s.points.at(i, 0));
        b.x_max = std::max(b.x_max, s.points.at(i, 0));
        b.y_min = std::min(b.y_min, s.points.at(i, 1));
        b.y_max = std::max(b.y_max, s.points.at(i, 1));
      }
    }
    if (!std::isfinite(b.x_min)) b = {-1, 1, -1, 1};
    // square aspect, 5% padding
    const double half = 0.55 * std::max({b.x_max - b.x_min, b.y_max - b.y_min, 1e-9});
    const double cx = 0.5 * (b.x_min + b.x_max), cy = 0.5 * (b.y_min + b.y_max);
    bounds = Bounds{cx - half, cx + half, cy - half, cy + half};
  }
  const Bounds b = *bounds;
  const double margin = 30.0;
  const double plot = size - 2 * margin;
  auto px = [&](double x) { return margin + (x - b.x_min) / (b.x_max - b.x_min) * plot; };
  auto py = [&](double y) { return margin + (b.y_max - y) / (b.y_max - b.y_min) * plot; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
     << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot << "\" height=\"" << plot
     << "\" fill=\"none\" stroke=\"#999\"/>\n";
  os << "<text x=\"" << size / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
     << escape(title) << "</text>\n";
  os << "<text x=\"" << margin << "\" y=\"" << size - 10 << "\" font-family=\"sans-serif\" font-size=\"10\">["
     << num(b.x_min) << ", " << num(b.x_max) << "] x [" << num(b.y_min) << ", " << num(b.y_max) << "]</text>\n";
  for (const Series& s : series) {
    os << "<g fill=\"" << escape(s.color) << "\" fill-opacity=\"0.6\">";
    if (!s.label.empty()) os << "<title>" << escape(s.label) << "</title>";
    os << '\n';
    for (std::size_t i = 0; i < s.points.rows(); ++i) {
      const double x = s.points.at(i, 0), y = s.points.at(i, 1);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (x < b.x_min || x > b.x_max || y < b.y_min || y > b.y_max) continue;
      os << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"" << num(s.radius) << "\"/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap(const std::vector<std::vector<double>>& values, const std::string& title, double vmin,
                    double vmax, int cell) {
  if (values.empty() || values.front().empty()) throw ShapeError("svg heatmap: empty matrix");
  const std::size_t rows = values.size(), cols = values.front().size();
  for (const auto& r : values) {
    if (r.size() != cols) throw ShapeError("svg heatmap: ragged matrix");
  }
  const double span = vmax > vmin ? vmax - vmin : 1.0;
  const int top = 30;
  const int width = static_cast<int>(cols) * cell + 20;
  const int height = static_cast<int>(rows) * cell + top + 30;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
     << escape(title) << "</text>\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      os << "<rect x=\"" << 10 + static_cast<int>(j) * cell << "\" y=\"" << top + static_cast<int>(i) * cell
         << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << ramp((values[i][j] - vmin) / span)
         << "\"><title>" << num(values[i][j]) << "</title></rect>\n";
    }
  }
  os << "<text x=\"10\" y=\"" << height - 10 << "\" font-family=\"sans-serif\" font-size=\"10\">range " << num(vmin)
     << " .. " << num(vmax) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write(const std::string& document, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out << document;
  if (!out) throw FormatError("write failed for " + path);
}

}  // namespace kgan::svg
