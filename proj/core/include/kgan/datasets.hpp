#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kgan/diff/tensor.hpp"

namespace kgan::datasets {

using diff::Tensor;

/// Ring of isotropic Gaussians in the plane.
struct MogSpec {
  std::size_t modes = 8;
  double radius = 2.0;
  double stddev = 0.05;
  std::vector<double> weights;  // empty means uniform
  std::uint64_t seed = 0;

  void validate() const;
  /// Mixture weights, expanded to uniform when none were given.
  std::vector<double> mixture_weights() const;
  /// modes x 2, mean c at angle 2*pi*c/modes.
  Tensor means() const;
};

struct LabeledPoints {
  Tensor points;
  std::vector<std::size_t> labels;
};

/// `counter` selects an independent draw for the same spec.
LabeledPoints mog_sample(const MogSpec& spec, std::size_t n, std::uint64_t counter = 0);

struct Split {
  Tensor train;
  Tensor held_out;
};

/// Shuffles rows with `seed` and puts round(fraction * n) of them in `train`.
/// Both parts must end up nonempty.
Split split(const Tensor& points, double fraction, std::uint64_t seed);

Tensor load_csv(const std::filesystem::path& path, bool header = false);
void save_csv(const Tensor& points, const std::filesystem::path& path, const std::vector<std::string>& header = {});

/// Isotropic affine map x -> (x - center) / scale putting the data inside
/// the unit box, so tanh generators can reach every point.
struct DataScaler {
  std::vector<double> center;
  double scale = 1.0;

  static DataScaler identity(std::size_t dim);
  /// Center at the bounding-box midpoint, scale 1.1 x the largest deviation.
  static DataScaler fit(const Tensor& points);

  Tensor forward(const Tensor& points) const;
  Tensor inverse(const Tensor& points) const;
  friend bool operator==(const DataScaler&, const DataScaler&) = default;
};

}  // namespace kgan::datasets
