#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kgan/diff/tensor.hpp"

namespace kgan::svg {

struct Series {
  diff::Tensor points;  // n x 2
  std::string color = "#1f77b4";
  std::string label;
  double radius = 1.5;
};

struct Bounds {
  double x_min, x_max, y_min, y_max;
};

/// Scatter plot of 2-D point sets. Bounds default to the padded data extent.
std::string scatter(const std::vector<Series>& series, const std::string& title,
                    std::optional<Bounds> bounds = std::nullopt, int size = 480);

/// Heatmap of values[i][j] with row i drawn top to bottom, colored on a
/// linear ramp from vmin to vmax.
std::string heatmap(const std::vector<std::vector<double>>& values, const std::string& title, double vmin,
                    double vmax, int cell = 16);

void write(const std::string& document, const std::string& path);

}  // namespace kgan::svg
