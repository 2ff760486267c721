#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kgan/diff/finite_difference.hpp"
#include "kgan/diff/graph.hpp"
#include "kgan/error.hpp"

namespace kgan::diff {
namespace {

Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.data()) v = n(rng);
  return t;
}

TEST(Tensor, RejectsSizeMismatch) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  EXPECT_THROW(Tensor({0, 3}, 0.0), ShapeError);
  EXPECT_EQ(Tensor({2, 3}, 1.0).size(), 6u);
}

TEST(Forward, AffineIdentity) {
  Graph g;
  auto x = g.input("x"), w = g.parameter("W"), b = g.parameter("b");
  g.set_output(g.affine(x, w, b));
  Bindings in;
  in.bind(x, Tensor::matrix(1, 2, {1, 2})).bind(w, Tensor::matrix(2, 2, {1, 0, 0, 1})).bind(b, Tensor::vector({0, 0}));
  EXPECT_EQ(forward(g, in).storage(), (std::vector<double>{1, 2}));
}

TEST(Forward, TanhOfZeroAndRelu) {
  Graph g;
  auto x = g.input("x");
  auto t = g.tanh(x);
  auto r = g.relu(x);
  g.set_output(t);
  Bindings in;
  in.bind(x, Tensor::matrix(2, 2, 0.0));
  EXPECT_EQ(evaluate(g, in).value(t), Tensor::matrix(2, 2, 0.0));

  in.bind(x, Tensor::vector({-1, 3}));
  EXPECT_EQ(evaluate(g, in).value(r).storage(), (std::vector<double>{0, 3}));
}

TEST(Forward, ShapeErrorNamesNode) {
  Graph g;
  auto x = g.input("x"), w = g.parameter("W"), b = g.parameter("b");
  auto y = g.affine(x, w, b);
  g.name(y, "layer0");
  g.set_output(y);
  Bindings in;
  in.bind(x, Tensor::matrix(1, 3, 1.0)).bind(w, Tensor::matrix(2, 2, 1.0)).bind(b, Tensor::vector({0, 0}));
  try {
    forward(g, in);
    FAIL() << "expected a shape error";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("layer0"), std::string::npos) << e.what();
  }
}

TEST(Forward, LogOfNonpositiveIsAnError) {
  Graph g;
  auto x = g.input("x");
  g.set_output(g.log(x));
  Bindings in;
  in.bind(x, Tensor::vector({1.0, 0.0}));
  EXPECT_THROW(forward(g, in), LogDomainError);
}

TEST(Forward, NonFiniteValueIsAnError) {
  Graph g;
  auto x = g.input("x");
  g.set_output(g.exp(x));
  Bindings in;
  in.bind(x, Tensor::vector({1000.0}));
  EXPECT_THROW(forward(g, in), NonFiniteError);
}

TEST(Forward, IsPure) {
  std::mt19937_64 rng(3);
  Graph g;
  auto a = g.input("a"), b = g.input("b");
  g.set_output(g.mean(g.exp(g.scale(g.squared_distance(a, b), -0.5))));
  Bindings in;
  const Tensor av = random_matrix(5, 3, rng), bv = random_matrix(4, 3, rng);
  in.bind(a, av).bind(b, bv);
  const Tensor first = forward(g, in);
  EXPECT_EQ(forward(g, in), first);
  EXPECT_EQ(in.at(a), av);
}

TEST(Backward, Square) {
  Graph g;
  auto w = g.parameter("w");
  g.set_output(g.sum(g.mul(w, w)));
  Bindings in;
  in.bind(w, Tensor::scalar(3.0));
  const auto r = backward(g, in);
  EXPECT_DOUBLE_EQ(r.value, 9.0);
  EXPECT_DOUBLE_EQ(r.grad(w).item(), 6.0);
}

TEST(Backward, SumTanhAtZero) {
  Graph g;
  auto w = g.parameter("w");
  g.set_output(g.sum(g.tanh(w)));
  Bindings in;
  in.bind(w, Tensor::vector({0, 0}));
  EXPECT_EQ(backward(g, in).grad(w).storage(), (std::vector<double>{1, 1}));
}

TEST(Backward, RejectsNonScalarOutput) {
  Graph g;
  auto w = g.parameter("w");
  g.set_output(g.tanh(w));
  Bindings in;
  in.bind(w, Tensor::vector({0, 0}));
  EXPECT_THROW(backward(g, in), ShapeError);
}

TEST(Backward, UnreachableParameterGetsZeros) {
  Graph g;
  auto w = g.parameter("w");
  auto unused = g.parameter("unused");
  g.set_output(g.sum(w));
  Bindings in;
  in.bind(w, Tensor::vector({1, 2})).bind(unused, Tensor::matrix(2, 2, 5.0));
  const auto r = backward(g, in);
  ASSERT_EQ(r.grads.size(), 2u);
  EXPECT_EQ(r.grad(unused), Tensor::matrix(2, 2, 0.0));
}

TEST(Backward, GradKeysAreExactlyTheParameters) {
  Graph g;
  auto x = g.input("x");
  auto w = g.parameter("w");
  g.set_output(g.sum(g.mul(x, w)));
  Bindings in;
  in.bind(x, Tensor::vector({1, 2})).bind(w, Tensor::vector({3, 4}));
  const auto r = backward(g, in);
  ASSERT_EQ(r.grads.size(), 1u);
  EXPECT_TRUE(r.grads.contains(w));
  EXPECT_EQ(r.grad(w).storage(), (std::vector<double>{1, 2}));
}

TEST(FiniteDifference, Examples) {
  auto square = [](const std::vector<Tensor>& p) { return p[0].item() * p[0].item(); };
  EXPECT_NEAR(fd_grad(square, {Tensor::scalar(3.0)})[0].item(), 6.0, 1e-8);
  auto expo = [](const std::vector<Tensor>& p) { return std::exp(p[0].item()); };
  EXPECT_NEAR(fd_grad(expo, {Tensor::scalar(0.0)})[0].item(), 1.0, 1e-9);
  EXPECT_THROW(fd_grad(square, {Tensor::scalar(1.0)}, 0.0), InvalidArgument);
}

// Builds loss(params) from one primitive applied to random data and compares
// reverse-mode gradients with central differences.
struct PrimitiveCase {
  const char* name;
  std::function<NodeId(Graph&, NodeId, NodeId)> op;  // (graph, parameter a, parameter b) -> node
  bool positive = false;                               // keep inputs > 0 (log, div)
};

class PrimitiveGradients : public ::testing::TestWithParam<PrimitiveCase> {};

TEST_P(PrimitiveGradients, MatchFiniteDifferences) {
  const PrimitiveCase& c = GetParam();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    Tensor a = random_matrix(3, 4, rng), b = random_matrix(3, 4, rng);
    if (c.positive) {
      for (double& v : a.data()) v = 0.5 + std::abs(v);
      for (double& v : b.data()) v = 0.5 + std::abs(v);
    }
    // weights make the scalar loss sensitive to every entry
    Tensor weights = random_matrix(3, 4, rng);
    Graph g;
    auto pa = g.parameter("a"), pb = g.parameter("b"), wt = g.input("weights");
    const NodeId y = c.op(g, pa, pb);
    // weight the entries when shapes allow, otherwise use the squared norm
    NodeId loss;
    {
      Bindings tmp;
      tmp.bind(pa, a).bind(pb, b).bind(wt, weights);
      g.set_output(y);
      const Shape s = forward(g, tmp).shape();
      if (s == weights.shape()) {
        loss = g.sum(g.mul(y, wt));
      } else {
        loss = g.sum(g.mul(y, y));
      }
    }
    g.set_output(loss);
    Bindings in;
    in.bind(pa, a).bind(pb, b).bind(wt, weights);
    const auto r = backward(g, in);
    auto f = [&](const std::vector<Tensor>& p) {
      Bindings local;
      local.bind(pa, p[0]).bind(pb, p[1]).bind(wt, weights);
      return forward(g, local).item();
    };
    const auto numeric = fd_grad(f, {a, b});
    EXPECT_LT(max_relative_error({r.grad(pa), r.grad(pb)}, numeric, 1e-6), 1e-4) << c.name << " seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllOps, PrimitiveGradients,
    ::testing::Values(
        PrimitiveCase{"affine",
                      // rows of a as inputs, b as a 3x4 weight, row means of b as bias
                      [](Graph& g, NodeId a, NodeId b) { return g.affine(a, b, g.mean_rows(b)); }},
        PrimitiveCase{"relu", [](Graph& g, NodeId a, NodeId b) { return g.relu(g.add(a, b)); }},
        PrimitiveCase{"tanh", [](Graph& g, NodeId a, NodeId b) { return g.tanh(g.mul(a, b)); }},
        PrimitiveCase{"sigmoid", [](Graph& g, NodeId a, NodeId b) { return g.sigmoid(g.sub(a, b)); }},
        PrimitiveCase{"exp", [](Graph& g, NodeId a, NodeId b) { return g.exp(g.scale(g.add(a, b), 0.3)); }},
        PrimitiveCase{"log", [](Graph& g, NodeId a, NodeId b) { return g.log(g.mul(a, b)); }, true},
        PrimitiveCase{"div", [](Graph& g, NodeId a, NodeId b) { return g.div(a, b); }, true},
        PrimitiveCase{"squared_distance", [](Graph& g, NodeId a, NodeId b) { return g.squared_distance(a, b); }},
        PrimitiveCase{"mean_rows", [](Graph& g, NodeId a, NodeId b) { return g.mean_rows(g.mul(a, b)); }},
        PrimitiveCase{"mean_cols", [](Graph& g, NodeId a, NodeId b) { return g.mean_cols(g.mul(a, b)); }},
        PrimitiveCase{"mean", [](Graph& g, NodeId a, NodeId b) { return g.mean(g.mul(a, b)); }},
        PrimitiveCase{"scalar_broadcast",
                      [](Graph& g, NodeId a, NodeId b) { return g.div(g.mul(a, g.mean(b)), g.shift(g.mean(g.mul(b, b)), 1.0)); }}),
    [](const ::testing::TestParamInfo<PrimitiveCase>& info) { return std::string(info.param.name); });

TEST(Backward, Linearity) {
  std::mt19937_64 rng(11);
  const Tensor w0 = random_matrix(4, 3, rng);
  const double a = 2.5, b = -0.75;
  auto build = [](Graph& g, NodeId w, int which) {
    return which == 0 ? g.sum(g.tanh(w)) : g.mean(g.exp(g.scale(w, 0.2)));
  };
  auto grad_of = [&](int which) {
    Graph g;
    auto w = g.parameter("w");
    g.set_output(build(g, w, which));
    Bindings in;
    in.bind(w, w0);
    return backward(g, in).grad(w);
  };
  Graph g;
  auto w = g.parameter("w");
  g.set_output(g.add(g.scale(build(g, w, 0), a), g.scale(build(g, w, 1), b)));
  Bindings in;
  in.bind(w, w0);
  const Tensor combined = backward(g, in).grad(w);
  const Tensor f = grad_of(0), h = grad_of(1);
  for (std::size_t i = 0; i < combined.size(); ++i) {
    EXPECT_NEAR(combined[i], a * f[i] + b * h[i], 1e-15);
  }
}

TEST(Backward, TwoLayerMlpMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  const Tensor x = random_matrix(6, 3, rng);
  std::vector<Tensor> p{random_matrix(4, 3, rng), Tensor::vector({0.1, -0.2, 0.3, 0.0}), random_matrix(2, 4, rng),
                        Tensor::vector({0.05, -0.05})};
  Graph g;
  auto xi = g.input("x");
  std::vector<NodeId> ids;
  for (const char* n : {"W0", "b0", "W1", "b1"}) ids.push_back(g.parameter(n));
  auto h = g.tanh(g.affine(xi, ids[0], ids[1]));
  auto y = g.sigmoid(g.affine(h, ids[2], ids[3]));
  g.set_output(g.mean(g.mul(y, y)));
  auto f = [&](const std::vector<Tensor>& params) {
    Bindings in;
    in.bind(xi, x);
    for (std::size_t i = 0; i < ids.size(); ++i) in.bind(ids[i], params[i]);
    return forward(g, in).item();
  };
  Bindings in;
  in.bind(xi, x);
  for (std::size_t i = 0; i < ids.size(); ++i) in.bind(ids[i], p[i]);
  const auto r = backward(g, in);
  std::vector<Tensor> analytic;
  for (auto id : ids) analytic.push_back(r.grad(id));
  EXPECT_LT(max_relative_error(analytic, fd_grad(f, p)), 1e-4);
}

}  // namespace
}  // namespace kgan::diff
