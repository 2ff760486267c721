#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kgan/diff/tensor.hpp"

namespace kgan::objective {

/// Closed-form one-dimensional density with a sampler and the interval
/// holding (numerically) all of its mass. Construction checks that the
/// density integrates to 1 within 1e-6 over that interval.
class DensityOracle {
 public:
  static DensityOracle gaussian(double mean, double stddev);
  static DensityOracle uniform(double low, double high);
  static DensityOracle gaussian_mixture(std::vector<double> means, std::vector<double> stddevs,
                                        std::vector<double> weights);

  double density(double x) const { return density_(x); }
  /// n x 1 matrix of iid draws.
  diff::Tensor sample(std::size_t n, std::uint64_t seed) const;

  double support_low() const noexcept { return low_; }
  double support_high() const noexcept { return high_; }
  const std::string& name() const noexcept { return name_; }

 private:
  using DensityFn = std::function<double(double)>;
  using SamplerFn = std::function<diff::Tensor(std::size_t, std::uint64_t)>;

  DensityOracle(std::string name, DensityFn density, SamplerFn sampler, double low, double high);

  std::string name_;
  DensityFn density_;
  SamplerFn sampler_;
  double low_;
  double high_;
};

struct IntegrationGrid {
  double low = -10.0;
  double high = 10.0;
  std::size_t points = 4000;
  /// Max allowed gap between the grid and the doubled-resolution grid.
  double self_check_tolerance = 1e-6;
};

struct QuadratureResult {
  double value = 0.0;
  double refined = 0.0;  // same rule on 2*points-1 nodes
  double discrepancy() const;
};

/// Trapezoid value of  int p log[(p+phi)/(p+q+2phi)] + q log[(q+phi)/(p+q+2phi)] dx
/// at the grid resolution and at double resolution. Integrand terms with a
/// zero density factor contribute 0.
QuadratureResult theoretical_jsd_quadrature(const DensityOracle& p, const DensityOracle& q, double phi,
                                            const IntegrationGrid& grid);

/// theoretical_jsd_quadrature(...).value after checking that the grid covers
/// both supports and that the self-check passes; throws InvalidArgument otherwise.
double theoretical_jsd(const DensityOracle& p, const DensityOracle& q, double phi, const IntegrationGrid& grid);

/// Trapezoid rule of f over [low, high] with `points` nodes.
double trapezoid(const std::function<double(double)>& f, double low, double high, std::size_t points);

}  // namespace kgan::objective
