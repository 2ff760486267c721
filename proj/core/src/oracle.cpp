#include "kgan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "kgan/error.hpp"
#include "kgan/random.hpp"

namespace kgan::objective {
namespace {

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// Every Gaussian oracle declares mean +- 8 sd as its support.
constexpr double kGaussianReach = 8.0;

double xlog_ratio(double a, double num, double den) {
  if (a == 0.0) return 0.0;
  return a * std::log(num / den);
}

}  // namespace

double trapezoid(const std::function<double(double)>& f, double low, double high, std::size_t points) {
  if (points < 2) throw InvalidArgument("trapezoid: need at least 2 nodes");
  if (!(high > low)) throw InvalidArgument("trapezoid: empty interval");
  const double h = (high - low) / static_cast<double>(points - 1);
  double acc = 0.5 * (f(low) + f(high));
  for (std::size_t i = 1; i + 1 < points; ++i) acc += f(low + h * static_cast<double>(i));
  return acc * h;
}

DensityOracle::DensityOracle(std::string name, DensityFn density, SamplerFn sampler, double low, double high)
    : name_(std::move(name)), density_(std::move(density)), sampler_(std::move(sampler)), low_(low), high_(high) {
  const double mass = trapezoid(density_, low_, high_, 20001);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw InvalidArgument("density oracle " + name_ + " integrates to " + std::to_string(mass) +
                          " over its declared support");
  }
}

DensityOracle DensityOracle::gaussian(double mean, double stddev) {
  if (!(stddev > 0.0)) throw InvalidArgument("gaussian oracle: stddev must be positive");
  return DensityOracle(
      "N(" + std::to_string(mean) + "," + std::to_string(stddev * stddev) + ")",
      [=](double x) { return normal_pdf(x, mean, stddev); },
      [=](std::size_t n, std::uint64_t seed) {
        Rng rng = make_rng(seed, {0x0c1e});
        std::normal_distribution<double> dist(mean, stddev);
        diff::Tensor t = diff::Tensor::matrix(n, 1);
        for (double& v : t.data()) v = dist(rng);
        return t;
      },
      mean - kGaussianReach * stddev, mean + kGaussianReach * stddev);
}

DensityOracle DensityOracle::uniform(double low, double high) {
  if (!(low < high)) throw InvalidArgument("uniform oracle: need low < high");
  const double h = 1.0 / (high - low);
  return DensityOracle(
      "U(" + std::to_string(low) + "," + std::to_string(high) + ")",
      [=](double x) { return (x >= low && x <= high) ? h : 0.0; },
      [=](std::size_t n, std::uint64_t seed) {
        Rng rng = make_rng(seed, {0x0c1f});
        std::uniform_real_distribution<double> dist(low, high);
        diff::Tensor t = diff::Tensor::matrix(n, 1);
        for (double& v : t.data()) v = dist(rng);
        return t;
      },
      low, high);
}

DensityOracle DensityOracle::gaussian_mixture(std::vector<double> means, std::vector<double> stddevs,
                                              std::vector<double> weights) {
  if (means.empty() || means.size() != stddevs.size() || means.size() != weights.size()) {
    throw InvalidArgument("mixture oracle: means, stddevs and weights must be nonempty and equally long");
  }
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(wsum - 1.0) > 1e-12) throw InvalidArgument("mixture oracle: weights must sum to 1");
  double low = means[0], high = means[0];
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (!(stddevs[i] > 0.0) || !(weights[i] >= 0.0)) throw InvalidArgument("mixture oracle: bad component");
    low = std::min(low, means[i] - kGaussianReach * stddevs[i]);
    high = std::max(high, means[i] + kGaussianReach * stddevs[i]);
  }
  auto pdf = [=](double x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) acc += weights[i] * normal_pdf(x, means[i], stddevs[i]);
    return acc;
  };
  auto sampler = [=](std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed, {0x0c20});
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::normal_distribution<double> z(0.0, 1.0);
    diff::Tensor t = diff::Tensor::matrix(n, 1);
    for (double& v : t.data()) {
      const std::size_t c = pick(rng);
      v = means[c] + stddevs[c] * z(rng);
    }
    return t;
  };
  return DensityOracle("gaussian mixture", pdf, sampler, low, high);
}

diff::Tensor DensityOracle::sample(std::size_t n, std::uint64_t seed) const {
  if (n == 0) throw InvalidArgument("density oracle: sample size must be >= 1");
  return sampler_(n, seed);
}

double QuadratureResult::discrepancy() const { return std::abs(value - refined); }

QuadratureResult theoretical_jsd_quadrature(const DensityOracle& p, const DensityOracle& q, double phi,
                                            const IntegrationGrid& grid) {
  if (!(phi >= 0.0)) throw InvalidArgument("theoretical_jsd: phi must be >= 0");
  auto integrand = [&](double x) {
    const double a = p.density(x);
    const double b = q.density(x);
    if (a == 0.0 && b == 0.0) return 0.0;
    const double den = a + b + 2.0 * phi;
    return xlog_ratio(a, a + phi, den) + xlog_ratio(b, b + phi, den);
  };
  QuadratureResult r;
  r.value = trapezoid(integrand, grid.low, grid.high, grid.points);
  r.refined = trapezoid(integrand, grid.low, grid.high, 2 * grid.points - 1);
  return r;
}

double theoretical_jsd(const DensityOracle& p, const DensityOracle& q, double phi, const IntegrationGrid& grid) {
  const double need_low = std::min(p.support_low(), q.support_low());
  const double need_high = std::max(p.support_high(), q.support_high());
  if (grid.low > need_low || grid.high < need_high) {
    throw InvalidArgument("theoretical_jsd: grid [" + std::to_string(grid.low) + ", " + std::to_string(grid.high) +
                          "] does not cover the supports [" + std::to_string(need_low) + ", " +
                          std::to_string(need_high) + "]");
  }
  const QuadratureResult r = theoretical_jsd_quadrature(p, q, phi, grid);
  if (r.discrepancy() > grid.self_check_tolerance) {
    throw InvalidArgument("theoretical_jsd: quadrature self-check failed, doubling the resolution moved the value by " +
                          std::to_string(r.discrepancy()));
  }
  return r.value;
}

}  // namespace kgan::objective
