#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kgan/diff/finite_difference.hpp"
#include "kgan/error.hpp"
#include "kgan/objective.hpp"
#include "kgan/oracle.hpp"

namespace kgan::objective {
namespace {

const double kLog2 = std::log(2.0);
const double kLog4 = std::log(4.0);

Tensor random_points(std::size_t n, std::size_t k, std::uint64_t seed, double scale = 1.0, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(shift, scale);
  Tensor t = Tensor::matrix(n, k);
  for (double& v : t.data()) v = d(rng);
  return t;
}

// Independent transcription: no Gram blocks, no shared density code.
double kernel(std::span<const double> a, std::span<const double> b, const KernelSpec& spec) {
  double d2 = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) d2 += (a[c] - b[c]) * (a[c] - b[c]);
  double sum = 0.0;
  for (double s : spec.bandwidths) {
    const double norm = spec.normalize ? std::pow(2.0 * M_PI * s * s, -0.5 * a.size()) : 1.0;
    sum += norm * std::exp(-d2 / (2.0 * s * s));
  }
  return sum / spec.bandwidths.size();
}

double density_at(std::span<const double> x, const Tensor& set, const KernelSpec& spec) {
  double s = 0.0;
  for (std::size_t i = 0; i < set.rows(); ++i) s += kernel(x, set.row(i), spec);
  return s / set.rows();
}

// The three generated-point roles are separate arguments so each gradient
// path can be probed on its own.
ObjectiveReport transcribed(const Tensor& x, const Tensor& g_query, const Tensor& g_ref_data,
                            const Tensor& g_ref_gen, const KernelSpec& spec, double phi) {
  const std::size_t n = x.rows();
  double t1 = 0.0, t2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = density_at(x.row(i), x, spec);
    const double pg = density_at(x.row(i), g_ref_data, spec);
    t1 += std::log((p + phi) / (p + pg + 2 * phi));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double p = density_at(g_query.row(i), x, spec);
    const double pg = density_at(g_query.row(i), g_ref_gen, spec);
    t2 += std::log((pg + phi) / (p + pg + 2 * phi));
  }
  ObjectiveReport r;
  r.term1 = t1 / n;
  r.term2 = t2 / n;
  r.total = r.term1 + r.term2;
  return r;
}

TEST(KnObjective, FixedPointOnIdenticalSets) {
  const Tensor x = random_points(9, 3, 1);
  const auto r = kn_objective(x, x, {{0.5, 2.0}, true, 3}, 0.0);
  EXPECT_NEAR(r.total, -kLog4, 1e-12);
  EXPECT_NEAR(r.term1, -kLog2, 1e-12);
  EXPECT_NEAR(r.term2, -kLog2, 1e-12);
}

TEST(KnObjective, FixedPointAnyOrder) {
  const Tensor x = random_points(7, 2, 2);
  const Tensor reversed = diff::gather_rows(x, std::vector<std::size_t>{6, 5, 4, 3, 2, 1, 0});
  EXPECT_NEAR(kn_objective(x, reversed, {{0.3}, false, 2}, 0.0).total, -kLog4, 1e-12);
}

TEST(KnObjective, SinglePointHandValue) {
  const Tensor x = Tensor::matrix(1, 1, {0.0}), g = Tensor::matrix(1, 1, {10.0});
  const KernelSpec spec{{0.1}, false, 1};
  const double k = 1.0;                  // K(0)
  const double tiny = std::exp(-5000.0); // K(10 / 0.1), underflows to 0
  const double expected = std::log((k + 1.0) / (k + tiny + 2.0)) * 2.0;
  const auto r = kn_objective(x, g, spec, 1.0);
  EXPECT_NEAR(r.total, expected, 1e-15);
  EXPECT_NEAR(r.term1, std::log(2.0 / 3.0), 1e-15);
}

TEST(KnObjective, MatchesTranscription) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Tensor x = random_points(8, 2, seed), g = random_points(8, 2, seed + 1000, 1.5, 0.5);
    const KernelSpec spec{{0.3 + 0.05 * seed, 1.0}, seed % 2 == 1, 2};
    const double phi = seed % 3 == 0 ? 0.0 : 1e-3 * seed;
    const auto fast = kn_objective(x, g, spec, phi);
    const auto slow = transcribed(x, g, g, g, spec, phi);
    EXPECT_NEAR(fast.term1, slow.term1, 1e-12);
    EXPECT_NEAR(fast.term2, slow.term2, 1e-12);
    EXPECT_EQ(fast.total, fast.term1 + fast.term2);
    EXPECT_LE(fast.term1, 0.0);
    EXPECT_LE(fast.term2, 0.0);
  }
}

TEST(KnObjective, UnderflowIsActionable) {
  // the normalization constant (2 pi sigma^2)^(-k/2) underflows to zero
  const std::size_t k = 60;
  const Tensor x = random_points(3, k, 3), g = random_points(3, k, 4);
  const KernelSpec spec{{1e6}, true, k};
  try {
    kn_objective(x, g, spec, 0.0);
    FAIL() << "expected an underflow error";
  } catch (const UnderflowError& e) {
    EXPECT_NE(std::string(e.what()).find("raise phi"), std::string::npos) << e.what();
  }
}

TEST(KnObjective, ScaleInvariantAtPhiZero) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Tensor x = random_points(10, 3, seed), g = random_points(10, 3, seed + 50, 1.2);
    // one bandwidth: a mixture weights its components by different constants
    KernelSpec spec{{0.3 + 0.1 * static_cast<double>(seed)}, false, 3};
    const double plain = kn_objective(x, g, spec, 0.0).total;
    spec.normalize = true;
    EXPECT_NEAR(kn_objective(x, g, spec, 0.0).total, plain, 1e-12);
  }
}

// Gradient of the objective with respect to the generated points, one role at a time.
TEST(KnObjective, GradientPathsMatchFiniteDifferences) {
  const Tensor x = random_points(6, 2, 7), g0 = random_points(6, 2, 8, 1.3, 0.4);
  const KernelSpec spec{{0.7}, false, 2};
  for (double phi : {0.0, 0.05}) {
    diff::Graph graph;
    auto data = graph.input("data");
    auto gq = graph.parameter("gen_query");
    auto grd = graph.parameter("gen_ref_for_data");
    auto grg = graph.parameter("gen_ref_for_gen");
    const auto nodes = build_objective(graph, {data, gq, grd, grg}, spec, phi);
    graph.set_output(nodes.total);
    diff::Bindings in;
    in.bind(data, x).bind(gq, g0).bind(grd, g0).bind(grg, g0);
    const auto res = diff::backward(graph, in);

    auto f = [&](const std::vector<Tensor>& p) { return transcribed(x, p[0], p[1], p[2], spec, phi).total; };
    const auto numeric = diff::fd_grad(f, {g0, g0, g0});
    const std::vector<Tensor> analytic{res.grad(gq), res.grad(grd), res.grad(grg)};
    for (std::size_t path = 0; path < 3; ++path) {
      EXPECT_LT(diff::max_relative_error({analytic[path]}, {numeric[path]}, 1e-7), 1e-4) << "path " << path;
    }
    // shared generated points receive the sum of the three paths
    diff::Graph shared;
    auto sd = shared.input("data");
    auto sg = shared.parameter("gen");
    shared.set_output(build_objective(shared, density::KdeInputs::shared(sd, sg), spec, phi).total);
    diff::Bindings sin;
    sin.bind(sd, x).bind(sg, g0);
    const Tensor total = diff::backward(shared, sin).grad(sg);
    for (std::size_t i = 0; i < total.size(); ++i) {
      EXPECT_NEAR(total[i], analytic[0][i] + analytic[1][i] + analytic[2][i], 1e-12);
    }
  }
}

TEST(OptimalDiscriminator, Examples) {
  const Tensor x = random_points(5, 2, 9);
  const std::vector<double> q{0.3, -0.1};
  EXPECT_NEAR(optimal_discriminator(q, x, x, {{0.5}, false, 2}), 0.5, 1e-15);
  const std::vector<double> origin{0.0};
  EXPECT_NEAR(optimal_discriminator(origin, Tensor::matrix(1, 1, {-1.0}), Tensor::matrix(1, 1, {1.0}),
                                    {{1.0}, false, 1}),
              0.5, 1e-15);
  EXPECT_NEAR(optimal_discriminator(origin, Tensor::matrix(1, 1, {0.0}), Tensor::matrix(1, 1, {2.0}),
                                    {{1.0}, false, 1}),
              0.8807970780, 1e-10);
}

TEST(OptimalDiscriminator, SwappedRolesSumToOne) {
  const Tensor x = random_points(6, 2, 10), g = random_points(6, 2, 11, 1.0, 1.0);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> q{d(rng), d(rng)};
    const KernelSpec spec{{0.9}, false, 2};
    EXPECT_NEAR(optimal_discriminator(q, x, g, spec) + optimal_discriminator(q, g, x, spec), 1.0, 1e-14);
  }
}

TEST(DiscreteDiscriminator, Examples) {
  const Tensor data = Tensor::matrix(2, 1, {1.0, 2.0});
  const Tensor gen = Tensor::matrix(2, 1, {2.0, 3.0});
  const std::vector<double> one{1.0}, two{2.0}, five{5.0};
  EXPECT_EQ(discrete_discriminator(one, data, gen), 1.0);
  EXPECT_EQ(discrete_discriminator(two, data, gen), 0.5);
  EXPECT_FALSE(discrete_discriminator(five, data, gen).has_value());
}

TEST(CorrectionTerms, EqualDensities) {
  const Tensor x = random_points(5, 1, 13);
  const Tensor mu = random_points(40, 1, 14);
  for (double phi : {1e-3, 1.0, 1e6}) {
    const auto t = correction_terms(mu, x, x, {{0.4}, true, 1}, phi, 3.0);
    EXPECT_NEAR(t.k1 + t.k2, -2.0 * 3.0 * kLog2, 1e-9);
  }
}

TEST(CorrectionTerms, LargePhiLimit) {
  const Tensor x = random_points(5, 1, 15), g = random_points(5, 1, 16, 1.0, 2.0);
  const auto t = correction_terms(random_points(30, 1, 17), x, g, {{0.4}, false, 1}, 1e9, 2.0);
  EXPECT_NEAR(t.k1 + t.k2, -2.0 * 2.0 * kLog2, 1e-8);
}

TEST(CorrectionTerms, RejectsZeroPhi) {
  const Tensor x = random_points(3, 1, 18);
  EXPECT_THROW(correction_terms(x, x, x, {{1.0}, false, 1}, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(correction_terms(x, x, x, {{1.0}, false, 1}, 0.1, 0.0), InvalidArgument);
}

TEST(CorrectionTerms, MatchesQuadratureWithinStandardErrors) {
  const Tensor x = random_points(20, 1, 19, 0.3, 0.4), g = random_points(20, 1, 20, 0.3, 0.6);
  const KernelSpec spec{{0.15}, true, 1};
  const double phi = 0.05;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t m = 50;
  Tensor mu = Tensor::matrix(m, 1);
  for (double& v : mu.data()) v = u(rng);
  const auto t = correction_terms(mu, x, g, spec, phi, 1.0);

  auto integrand = [&](double z, bool first) {
    const std::vector<double> q{z};
    const double p = density_at(q, x, spec), pg = density_at(q, g, spec);
    return std::log(((first ? p : pg) + phi) / (p + pg + 2 * phi));
  };
  for (bool first : {true, false}) {
    const double exact = trapezoid([&](double z) { return integrand(z, first); }, 0.0, 1.0, 20001);
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = integrand(mu[i], first);
      mean += v;
      sq += v * v;
    }
    mean /= m;
    const double se = std::sqrt((sq / m - mean * mean) / (m - 1));
    EXPECT_LT(std::abs((first ? t.k1 : t.k2) - exact), 3.0 * se) << (first ? "k1" : "k2");
    EXPECT_NEAR(first ? t.k1 : t.k2, mean, 1e-12);
  }
  EXPECT_NEAR(augmented_objective(kn_objective(x, g, spec, phi), t), kn_objective(x, g, spec, phi).total + t.k1 + t.k2,
              0.0);
}

TEST(TheoreticalJsd, IdenticalDensities) {
  const auto p = DensityOracle::gaussian(0.0, 1.0);
  EXPECT_NEAR(theoretical_jsd(p, p, 0.0, {-10, 10, 4000, 1e-6}), -kLog4, 1e-6);
  const auto q = DensityOracle::gaussian(0.0, 1.0);
  EXPECT_NEAR(theoretical_jsd(p, q, 0.0, {-10, 10, 4000, 1e-6}), -kLog4, 1e-6);
  const auto u = DensityOracle::uniform(-1.0, 1.0);
  EXPECT_NEAR(theoretical_jsd(u, u, 0.0, {-2, 2, 4001, 1e-3}), -kLog4, 1e-3);
}

TEST(TheoreticalJsd, SeparatedGaussiansSelfConsistent) {
  const auto p = DensityOracle::gaussian(0.0, 1.0), q = DensityOracle::gaussian(3.0, 1.0);
  const auto quad = theoretical_jsd_quadrature(p, q, 0.0, {-10, 13, 4000, 1e-6});
  EXPECT_GT(quad.value, -kLog4);
  EXPECT_LT(quad.value, 0.0);
  EXPECT_LT(quad.discrepancy(), 1e-6);
}

TEST(TheoreticalJsd, RejectsShortGrid) {
  const auto p = DensityOracle::gaussian(0.0, 1.0), q = DensityOracle::gaussian(3.0, 1.0);
  EXPECT_THROW(theoretical_jsd(p, q, 0.0, {-2, 2, 4000, 1e-6}), InvalidArgument);
}

TEST(DensityOracle, MassAndSampling) {
  const auto mix = DensityOracle::gaussian_mixture({-2.0, 2.0}, {0.5, 0.5}, {0.3, 0.7});
  EXPECT_NEAR(trapezoid([&](double z) { return mix.density(z); }, mix.support_low(), mix.support_high(), 20001), 1.0,
              1e-6);
  const Tensor s = mix.sample(20000, 3);
  double right = 0.0;
  for (double v : s.data()) right += v > 0.0;
  EXPECT_NEAR(right / 20000.0, 0.7, 0.02);
}

}  // namespace
}  // namespace kgan::objective
