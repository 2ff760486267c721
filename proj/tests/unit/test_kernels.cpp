#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kgan/error.hpp"
#include "kgan/kernels.hpp"

namespace kgan::kernels {
namespace {

TEST(Rbf, Examples) {
  const std::vector<double> zero{0.0};
  EXPECT_DOUBLE_EQ(rbf(zero, 1.0, false, 1), 1.0);
  const std::vector<double> e1{1.0, 0.0};
  EXPECT_NEAR(rbf(e1, 1.0, false, 2), 0.6065306597, 1e-10);
  EXPECT_NEAR(rbf(zero, 2.0, true, 1), 0.1994711402, 1e-10);
}

TEST(Rbf, RejectsNonpositiveSigma) {
  const std::vector<double> u{1.0};
  EXPECT_THROW(rbf(u, 0.0, false, 1), InvalidArgument);
  EXPECT_THROW(rbf(u, -1.0, false, 1), InvalidArgument);
}

TEST(Rbf, SymmetricAndMonotone) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> u{n(rng), n(rng), n(rng)};
    std::vector<double> minus{-u[0], -u[1], -u[2]};
    EXPECT_EQ(rbf(u, 0.7, true, 3), rbf(minus, 0.7, true, 3));
    std::vector<double> longer{1.5 * u[0], 1.5 * u[1], 1.5 * u[2]};
    EXPECT_LE(rbf(longer, 0.7, false, 3), rbf(u, 0.7, false, 3));
  }
}

TEST(Mixture, Examples) {
  const std::vector<double> zero{0.0}, one{1.0};
  EXPECT_DOUBLE_EQ(mixture_eval(zero, {{1.0, 2.0}, false, 1}), 1.0);
  EXPECT_DOUBLE_EQ(mixture_eval(one, {{1.0}, false, 1}), std::exp(-0.5));
  EXPECT_NEAR(mixture_eval(one, {{1.0, 2.0}, false, 1}), (std::exp(-0.5) + std::exp(-0.125)) / 2.0, 1e-15);
}

TEST(Mixture, BoundedByComponents) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0), s(0.05, 4.0);
  for (int t = 0; t < 200; ++t) {
    const KernelSpec spec{{s(rng), s(rng), s(rng)}, t % 2 == 0, 2};
    const std::vector<double> x{u(rng), u(rng)};
    double lo = INFINITY, hi = -INFINITY;
    for (double sigma : spec.bandwidths) {
      const double v = rbf(x, sigma, spec.normalize, 2);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double m = mixture_eval(x, spec);
    EXPECT_GE(m, lo * (1 - 1e-15));
    EXPECT_LE(m, hi * (1 + 1e-15));
  }
}

TEST(KernelSpec, Validates) {
  EXPECT_THROW((KernelSpec{{}, false, 1}).validate(), InvalidArgument);
  EXPECT_THROW((KernelSpec{{1.0, -1.0}, false, 1}).validate(), InvalidArgument);
  EXPECT_THROW((KernelSpec{{1.0}, false, 0}).validate(), InvalidArgument);
  EXPECT_NO_THROW((KernelSpec{{0.5, 1.0}, true, 3}).validate());
}

TEST(Schedule, Constant) {
  auto s = BandwidthSchedule::constant(0.5);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(s.step(), 0.5);
}

TEST(Schedule, LadderClampsWhenExhausted) {
  auto s = BandwidthSchedule::ladder({{0.8, 2}, {0.4, 2}});
  std::vector<double> seen;
  for (int i = 0; i < 5; ++i) seen.push_back(s.step());
  EXPECT_EQ(seen, (std::vector<double>{0.8, 0.8, 0.4, 0.4, 0.4}));
}

TEST(Schedule, AnnealingLadder) {
  const std::size_t n = 10000;
  auto s = BandwidthSchedule::ladder({{0.8, n}, {0.4, n}, {0.2, n}, {0.1, n}, {0.05, n}, {0.025, n}});
  EXPECT_EQ(s.total_iterations(), 6 * n);
  std::vector<double> distinct;
  for (std::size_t i = 0; i < 6 * n; ++i) {
    const double sigma = s.step();
    if (distinct.empty() || distinct.back() != sigma) distinct.push_back(sigma);
  }
  EXPECT_EQ(distinct, (std::vector<double>{0.8, 0.4, 0.2, 0.1, 0.05, 0.025}));
}

TEST(Schedule, GeometricDecaysToFloor) {
  auto s = BandwidthSchedule::geometric(1.0, 0.5, 0.2);
  EXPECT_DOUBLE_EQ(s.step(), 1.0);
  EXPECT_DOUBLE_EQ(s.step(), 0.5);
  EXPECT_DOUBLE_EQ(s.step(), 0.25);
  EXPECT_DOUBLE_EQ(s.step(), 0.2);
  EXPECT_DOUBLE_EQ(s.step(), 0.2);
}

TEST(Schedule, RejectsInvalid) {
  EXPECT_THROW(BandwidthSchedule::constant(0.0), InvalidArgument);
  EXPECT_THROW(BandwidthSchedule::ladder({}), InvalidArgument);
  EXPECT_THROW(BandwidthSchedule::ladder({{0.5, 0}}), InvalidArgument);
  EXPECT_THROW(BandwidthSchedule::ladder({{-0.5, 3}}), InvalidArgument);
  EXPECT_THROW(BandwidthSchedule::geometric(1.0, 1.5, 0.1), InvalidArgument);
  EXPECT_THROW(BandwidthSchedule::geometric(1.0, 0.0, 0.1), InvalidArgument);
  EXPECT_THROW(BandwidthSchedule::geometric(1.0, 0.5, 0.0), InvalidArgument);
}

TEST(Schedule, DeterministicGivenState) {
  auto a = BandwidthSchedule::geometric(2.0, 0.9, 0.01);
  for (int i = 0; i < 7; ++i) a.step();
  auto b = a;
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a.step(), b.step());
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace kgan::kernels
