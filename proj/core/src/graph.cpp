#include "kgan/diff/graph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "kgan/error.hpp"

namespace kgan::diff {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using MutVecMap = Eigen::Map<Eigen::VectorXd>;

ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

MutMap as_matrix(Tensor& t) {
  return MutMap(t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

bool broadcastable(const Tensor& a, const Tensor& b) { return a.shape() == b.shape() || b.is_scalar(); }

[[noreturn]] void shape_fail(const Graph& g, NodeId id, const std::string& detail) {
  throw ShapeError("shape mismatch at node " + g.describe(id) + ": " + detail);
}

Tensor eval_affine(const Graph& g, NodeId id, const Tensor& x, const Tensor& w, const Tensor& b) {
  if (w.rank() != 2) shape_fail(g, id, "weight must be a matrix, got " + shape_string(w.shape()));
  const std::size_t out = w.shape()[0];
  const std::size_t in = w.shape()[1];
  if (b.rank() != 1 || b.size() != out) {
    shape_fail(g, id, "bias " + shape_string(b.shape()) + " does not match weight " + shape_string(w.shape()));
  }
  const bool single = x.rank() == 1;
  if (!(single ? x.size() == in : (x.rank() == 2 && x.cols() == in))) {
    shape_fail(g, id, "input " + shape_string(x.shape()) + " does not match weight " + shape_string(w.shape()));
  }
  const std::size_t n = single ? 1 : x.rows();
  Tensor y = single ? Tensor(Shape{out}) : Tensor::matrix(n, out);
  MutMap ym(y.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out));
  ConstMap xm(x.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(in));
  ym.noalias() = xm * as_matrix(w).transpose();
  ym.rowwise() += ConstVecMap(b.data().data(), static_cast<Eigen::Index>(out)).transpose();
  return y;
}

Tensor eval_squared_distance(const Graph& g, NodeId id, const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.cols()) {
    shape_fail(g, id, "point sets " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  }
  const auto am = as_matrix(a);
  const auto bm = as_matrix(b);
  Tensor d = Tensor::matrix(a.rows(), b.rows());
  auto dm = as_matrix(d);
  dm.noalias() = -2.0 * am * bm.transpose();
  const Eigen::VectorXd an = am.rowwise().squaredNorm();
  const Eigen::VectorXd bn = bm.rowwise().squaredNorm();
  for (Eigen::Index i = 0; i < dm.rows(); ++i) {
    for (Eigen::Index j = 0; j < dm.cols(); ++j) {
      const double v = an[i] + bn[j] + dm(i, j);
      dm(i, j) = v > 0.0 ? v : 0.0;
    }
  }
  return d;
}

template <class F>
Tensor map_unary(const Tensor& x, F f) {
  Tensor y(x.shape());
  auto src = x.data();
  auto dst = y.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return y;
}

template <class F>
Tensor map_binary(const Tensor& a, const Tensor& b, F f) {
  Tensor y(a.shape());
  auto pa = a.data();
  auto dst = y.data();
  if (b.is_scalar() && a.shape() != b.shape()) {
    const double s = b[0];
    for (std::size_t i = 0; i < pa.size(); ++i) dst[i] = f(pa[i], s);
  } else {
    auto pb = b.data();
    for (std::size_t i = 0; i < pa.size(); ++i) dst[i] = f(pa[i], pb[i]);
  }
  return y;
}

void accumulate(std::vector<Tensor>& grads, std::vector<bool>& seeded, NodeId id, Tensor g) {
  if (!seeded[id]) {
    grads[id] = std::move(g);
    seeded[id] = true;
    return;
  }
  auto dst = grads[id].data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Gradient w.r.t. a broadcast operand: reduce when the operand was a scalar.
Tensor reduce_to(const Tensor& grad, const Tensor& operand) {
  if (operand.shape() == grad.shape()) return grad;
  double s = 0.0;
  for (double v : grad.data()) s += v;
  return Tensor(operand.shape(), s);
}

}  // namespace

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Input: return "input";
    case Op::Parameter: return "parameter";
    case Op::Affine: return "affine";
    case Op::Relu: return "relu";
    case Op::Tanh: return "tanh";
    case Op::Sigmoid: return "sigmoid";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::SquaredDistance: return "squared_distance";
    case Op::MeanRows: return "mean_rows";
    case Op::MeanCols: return "mean_cols";
    case Op::Mean: return "mean";
    case Op::Sum: return "sum";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Scale: return "scale";
    case Op::Shift: return "shift";
  }
  return "?";
}

NodeId Graph::push(Node node) {
  for (NodeId p : node.parents) {
    if (p >= nodes_.size()) throw InvalidArgument("graph: parent node " + std::to_string(p) + " does not exist");
  }
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

NodeId Graph::input(std::string name) {
  const NodeId id = push(Node{Op::Input, {}, 0.0, std::move(name)});
  inputs_.push_back(id);
  return id;
}

NodeId Graph::parameter(std::string name) {
  const NodeId id = push(Node{Op::Parameter, {}, 0.0, std::move(name)});
  parameters_.push_back(id);
  return id;
}

NodeId Graph::affine(NodeId x, NodeId weight, NodeId bias) { return push(Node{Op::Affine, {x, weight, bias}, 0.0, {}}); }
NodeId Graph::unary(Op op, NodeId x) { return push(Node{op, {x}, 0.0, {}}); }
NodeId Graph::binary(Op op, NodeId a, NodeId b) { return push(Node{op, {a, b}, 0.0, {}}); }
NodeId Graph::scale(NodeId x, double c) { return push(Node{Op::Scale, {x}, c, {}}); }
NodeId Graph::shift(NodeId x, double c) { return push(Node{Op::Shift, {x}, c, {}}); }

void Graph::name(NodeId id, std::string label) { nodes_.at(id).name = std::move(label); }

void Graph::set_output(NodeId id) {
  if (id >= nodes_.size()) throw InvalidArgument("graph: output node does not exist");
  output_ = id;
  has_output_ = true;
}

NodeId Graph::output() const {
  if (!has_output_) throw InvalidArgument("graph has no output node");
  return output_;
}

bool Graph::is_leaf(NodeId id) const {
  const Op op = nodes_.at(id).op;
  return op == Op::Input || op == Op::Parameter;
}

std::string Graph::describe(NodeId id) const {
  const Node& n = nodes_.at(id);
  std::string s = "#" + std::to_string(id) + " " + std::string(op_name(n.op));
  if (!n.name.empty()) s += " '" + n.name + "'";
  return s;
}

Bindings& Bindings::bind(NodeId leaf, Tensor value) {
  values_.insert_or_assign(leaf, std::move(value));
  return *this;
}

const Tensor& Bindings::at(NodeId leaf) const {
  auto it = values_.find(leaf);
  if (it == values_.end()) throw InvalidArgument("leaf #" + std::to_string(leaf) + " is not bound");
  return it->second;
}

Evaluation evaluate(const Graph& g, const Bindings& inputs) {
  Evaluation ev;
  ev.values_.resize(g.size());
  ev.output_ = g.output();
  auto& v = ev.values_;
  for (NodeId id = 0; id < g.size(); ++id) {
    const Node& n = g.node(id);
    auto arg = [&](std::size_t i) -> const Tensor& { return v[n.parents[i]]; };
    switch (n.op) {
      case Op::Input:
      case Op::Parameter:
        if (!inputs.contains(id)) throw InvalidArgument("leaf " + g.describe(id) + " is not bound");
        v[id] = inputs.at(id);
        break;
      case Op::Affine:
        v[id] = eval_affine(g, id, arg(0), arg(1), arg(2));
        break;
      case Op::Relu:
        v[id] = map_unary(arg(0), [](double x) { return x > 0.0 ? x : 0.0; });
        break;
      case Op::Tanh:
        v[id] = map_unary(arg(0), [](double x) { return std::tanh(x); });
        break;
      case Op::Sigmoid:
        v[id] = map_unary(arg(0), [](double x) {
          if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
          const double e = std::exp(x);
          return e / (1.0 + e);
        });
        break;
      case Op::Exp:
        v[id] = map_unary(arg(0), [](double x) { return std::exp(x); });
        break;
      case Op::Log:
        for (double x : arg(0).data()) {
          if (!(x > 0.0)) {
            throw LogDomainError("log of nonpositive value " + std::to_string(x) + " at node " + g.describe(id));
          }
        }
        v[id] = map_unary(arg(0), [](double x) { return std::log(x); });
        break;
      case Op::SquaredDistance:
        v[id] = eval_squared_distance(g, id, arg(0), arg(1));
        break;
      case Op::MeanRows: {
        const Tensor& x = arg(0);
        if (x.rank() != 2) shape_fail(g, id, "expects a matrix, got " + shape_string(x.shape()));
        Tensor y(Shape{x.rows()});
        MutVecMap(y.data().data(), static_cast<Eigen::Index>(x.rows())) = as_matrix(x).rowwise().mean();
        v[id] = std::move(y);
        break;
      }
      case Op::MeanCols: {
        const Tensor& x = arg(0);
        if (x.rank() != 2) shape_fail(g, id, "expects a matrix, got " + shape_string(x.shape()));
        Tensor y(Shape{x.cols()});
        MutVecMap(y.data().data(), static_cast<Eigen::Index>(x.cols())) = as_matrix(x).colwise().mean().transpose();
        v[id] = std::move(y);
        break;
      }
      case Op::Mean:
      case Op::Sum: {
        double s = 0.0;
        for (double x : arg(0).data()) s += x;
        if (n.op == Op::Mean) s /= static_cast<double>(arg(0).size());
        v[id] = Tensor::scalar(s);
        break;
      }
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div: {
        const Tensor& a = arg(0);
        const Tensor& b = arg(1);
        if (!broadcastable(a, b)) {
          shape_fail(g, id, "operands " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
        }
        switch (n.op) {
          case Op::Add: v[id] = map_binary(a, b, [](double x, double y) { return x + y; }); break;
          case Op::Sub: v[id] = map_binary(a, b, [](double x, double y) { return x - y; }); break;
          case Op::Mul: v[id] = map_binary(a, b, [](double x, double y) { return x * y; }); break;
          default: v[id] = map_binary(a, b, [](double x, double y) { return x / y; }); break;
        }
        break;
      }
      case Op::Scale:
        v[id] = map_unary(arg(0), [c = n.constant](double x) { return c * x; });
        break;
      case Op::Shift:
        v[id] = map_unary(arg(0), [c = n.constant](double x) { return x + c; });
        break;
    }
    if (!v[id].all_finite()) throw NonFiniteError("non-finite value at node " + g.describe(id));
  }
  return ev;
}

Tensor forward(const Graph& graph, const Bindings& inputs) { return evaluate(graph, inputs).output(); }

GradientResult backward(const Graph& graph, const Bindings& inputs) {
  return backward(graph, evaluate(graph, inputs));
}

GradientResult backward(const Graph& g, const Evaluation& ev) {
  const NodeId out = g.output();
  const Tensor& y = ev.value(out);
  if (y.size() != 1) {
    throw ShapeError("backward needs a scalar output, node " + g.describe(out) + " has shape " +
                     shape_string(y.shape()));
  }

  // Only nodes downstream of a parameter carry gradients.
  std::vector<bool> needs(g.size(), false);
  for (NodeId id = 0; id < g.size(); ++id) {
    const Node& n = g.node(id);
    if (n.op == Op::Parameter) {
      needs[id] = true;
      continue;
    }
    for (NodeId p : n.parents) needs[id] = needs[id] || needs[p];
  }

  std::vector<Tensor> grads(g.size());
  std::vector<bool> seeded(g.size(), false);
  if (needs[out]) {
    grads[out] = Tensor(y.shape(), 1.0);
    seeded[out] = true;
  }

  for (NodeId id = out + 1; id-- > 0;) {
    if (!seeded[id] || !needs[id]) continue;
    const Node& n = g.node(id);
    const Tensor& gy = grads[id];
    const Tensor& val = ev.value(id);
    auto parent = [&](std::size_t i) { return n.parents[i]; };
    auto pval = [&](std::size_t i) -> const Tensor& { return ev.value(n.parents[i]); };
    auto want = [&](std::size_t i) { return needs[n.parents[i]]; };

    switch (n.op) {
      case Op::Input:
      case Op::Parameter:
        break;
      case Op::Affine: {
        const Tensor& x = pval(0);
        const Tensor& w = pval(1);
        const auto nrows = static_cast<Eigen::Index>(x.rank() == 1 ? 1 : x.rows());
        const auto in = static_cast<Eigen::Index>(w.shape()[1]);
        const auto outw = static_cast<Eigen::Index>(w.shape()[0]);
        ConstMap gm(gy.data().data(), nrows, outw);
        ConstMap xm(x.data().data(), nrows, in);
        if (want(0)) {
          Tensor gx(x.shape());
          MutMap(gx.data().data(), nrows, in).noalias() = gm * as_matrix(w);
          accumulate(grads, seeded, parent(0), std::move(gx));
        }
        if (want(1)) {
          Tensor gw(w.shape());
          as_matrix(gw).noalias() = gm.transpose() * xm;
          accumulate(grads, seeded, parent(1), std::move(gw));
        }
        if (want(2)) {
          Tensor gb(pval(2).shape());
          MutVecMap(gb.data().data(), outw) = gm.colwise().sum().transpose();
          accumulate(grads, seeded, parent(2), std::move(gb));
        }
        break;
      }
      case Op::Relu:
        accumulate(grads, seeded, parent(0),
                   map_binary(gy, pval(0), [](double gv, double x) { return x > 0.0 ? gv : 0.0; }));
        break;
      case Op::Tanh:
        accumulate(grads, seeded, parent(0), map_binary(gy, val, [](double gv, double t) { return gv * (1.0 - t * t); }));
        break;
      case Op::Sigmoid:
        accumulate(grads, seeded, parent(0), map_binary(gy, val, [](double gv, double s) { return gv * s * (1.0 - s); }));
        break;
      case Op::Exp:
        accumulate(grads, seeded, parent(0), map_binary(gy, val, [](double gv, double e) { return gv * e; }));
        break;
      case Op::Log:
        accumulate(grads, seeded, parent(0), map_binary(gy, pval(0), [](double gv, double x) { return gv / x; }));
        break;
      case Op::SquaredDistance: {
        const auto am = as_matrix(pval(0));
        const auto bm = as_matrix(pval(1));
        const auto gm = as_matrix(gy);
        if (want(0)) {
          Tensor ga(pval(0).shape());
          auto gam = as_matrix(ga);
          gam.noalias() = -2.0 * gm * bm;
          gam += 2.0 * (gm.rowwise().sum().asDiagonal() * am);
          accumulate(grads, seeded, parent(0), std::move(ga));
        }
        if (want(1)) {
          Tensor gb(pval(1).shape());
          auto gbm = as_matrix(gb);
          gbm.noalias() = -2.0 * gm.transpose() * am;
          gbm += 2.0 * (gm.colwise().sum().transpose().asDiagonal() * bm);
          accumulate(grads, seeded, parent(1), std::move(gb));
        }
        break;
      }
      case Op::MeanRows: {
        const Tensor& x = pval(0);
        Tensor gx(x.shape());
        const double inv = 1.0 / static_cast<double>(x.cols());
        for (std::size_t r = 0; r < x.rows(); ++r) {
          auto row = gx.row(r);
          std::fill(row.begin(), row.end(), gy[r] * inv);
        }
        accumulate(grads, seeded, parent(0), std::move(gx));
        break;
      }
      case Op::MeanCols: {
        const Tensor& x = pval(0);
        Tensor gx(x.shape());
        const double inv = 1.0 / static_cast<double>(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) {
          auto row = gx.row(r);
          for (std::size_t c = 0; c < row.size(); ++c) row[c] = gy[c] * inv;
        }
        accumulate(grads, seeded, parent(0), std::move(gx));
        break;
      }
      case Op::Mean:
        accumulate(grads, seeded, parent(0),
                   Tensor(pval(0).shape(), gy[0] / static_cast<double>(pval(0).size())));
        break;
      case Op::Sum:
        accumulate(grads, seeded, parent(0), Tensor(pval(0).shape(), gy[0]));
        break;
      case Op::Add:
        if (want(0)) accumulate(grads, seeded, parent(0), gy);
        if (want(1)) accumulate(grads, seeded, parent(1), reduce_to(gy, pval(1)));
        break;
      case Op::Sub:
        if (want(0)) accumulate(grads, seeded, parent(0), gy);
        if (want(1)) accumulate(grads, seeded, parent(1), reduce_to(map_unary(gy, [](double x) { return -x; }), pval(1)));
        break;
      case Op::Mul:
        if (want(0)) accumulate(grads, seeded, parent(0), map_binary(gy, pval(1), [](double gv, double b) { return gv * b; }));
        if (want(1)) {
          accumulate(grads, seeded, parent(1),
                     reduce_to(map_binary(gy, pval(0), [](double gv, double a) { return gv * a; }), pval(1)));
        }
        break;
      case Op::Div: {
        const Tensor& b = pval(1);
        if (want(0)) accumulate(grads, seeded, parent(0), map_binary(gy, b, [](double gv, double bv) { return gv / bv; }));
        if (want(1)) {
          // d(a/b)/db = -(a/b)/b
          Tensor t = map_binary(gy, val, [](double gv, double q) { return -gv * q; });
          t = map_binary(t, b, [](double tv, double bv) { return tv / bv; });
          accumulate(grads, seeded, parent(1), reduce_to(t, b));
        }
        break;
      }
      case Op::Scale:
        accumulate(grads, seeded, parent(0), map_unary(gy, [c = n.constant](double x) { return c * x; }));
        break;
      case Op::Shift:
        accumulate(grads, seeded, parent(0), gy);
        break;
    }
  }

  GradientResult result;
  result.value = y[0];
  for (NodeId p : g.parameters()) {
    Tensor gp = seeded[p] ? std::move(grads[p]) : Tensor(ev.value(p).shape(), 0.0);
    if (!gp.all_finite()) throw NonFiniteError("non-finite gradient for parameter " + g.describe(p));
    result.grads.emplace(p, std::move(gp));
  }
  return result;
}

}  // namespace kgan::diff
