#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgan/diff/tensor.hpp"

namespace kgan::diff {

using NodeId = std::size_t;

enum class Op : std::uint8_t {
  Input,      // bound leaf, never differentiated
  Parameter,  // bound leaf, differentiated
  Affine,     // x[n,in] * W[out,in]^T + b[out]
  Relu,
  Tanh,
  Sigmoid,
  Exp,
  Log,              // guarded: argument must be > 0
  SquaredDistance,  // a[n,k], b[m,k] -> [n,m] of ||a_i - b_j||^2
  MeanRows,         // [n,m] -> [n]
  MeanCols,         // [n,m] -> [m]
  Mean,             // any -> scalar
  Sum,              // any -> scalar
  Add,
  Sub,
  Mul,
  Div,
  Scale,  // constant * x
  Shift,  // x + constant
};

std::string_view op_name(Op op);

struct Node {
  Op op = Op::Input;
  std::vector<NodeId> parents;
  double constant = 0.0;
  std::string name;
};

/// Static description of a computation. Leaves are bound per evaluation, so
/// a graph can be built once and evaluated on many inputs. Nodes are stored
/// in creation order, which is always a valid topological order.
class Graph {
 public:
  NodeId input(std::string name);
  NodeId parameter(std::string name);

  NodeId affine(NodeId x, NodeId weight, NodeId bias);
  NodeId relu(NodeId x) { return unary(Op::Relu, x); }
  NodeId tanh(NodeId x) { return unary(Op::Tanh, x); }
  NodeId sigmoid(NodeId x) { return unary(Op::Sigmoid, x); }
  NodeId exp(NodeId x) { return unary(Op::Exp, x); }
  NodeId log(NodeId x) { return unary(Op::Log, x); }
  NodeId squared_distance(NodeId a, NodeId b) { return binary(Op::SquaredDistance, a, b); }
  NodeId mean_rows(NodeId x) { return unary(Op::MeanRows, x); }
  NodeId mean_cols(NodeId x) { return unary(Op::MeanCols, x); }
  NodeId mean(NodeId x) { return unary(Op::Mean, x); }
  NodeId sum(NodeId x) { return unary(Op::Sum, x); }
  NodeId add(NodeId a, NodeId b) { return binary(Op::Add, a, b); }
  NodeId sub(NodeId a, NodeId b) { return binary(Op::Sub, a, b); }
  NodeId mul(NodeId a, NodeId b) { return binary(Op::Mul, a, b); }
  NodeId div(NodeId a, NodeId b) { return binary(Op::Div, a, b); }
  NodeId scale(NodeId x, double c);
  NodeId shift(NodeId x, double c);

  /// Attach a label used in error messages.
  void name(NodeId id, std::string label);

  void set_output(NodeId id);
  NodeId output() const;
  bool has_output() const noexcept { return has_output_; }

  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<NodeId>& parameters() const noexcept { return parameters_; }
  const std::vector<NodeId>& inputs() const noexcept { return inputs_; }
  bool is_leaf(NodeId id) const;

  /// "#7 tanh 'layer1'" style description for messages.
  std::string describe(NodeId id) const;

 private:
  NodeId push(Node node);
  NodeId unary(Op op, NodeId x);
  NodeId binary(Op op, NodeId a, NodeId b);

  std::vector<Node> nodes_;
  std::vector<NodeId> parameters_;
  std::vector<NodeId> inputs_;
  NodeId output_ = 0;
  bool has_output_ = false;
};

/// Leaf values for one evaluation.
class Bindings {
 public:
  Bindings& bind(NodeId leaf, Tensor value);
  const Tensor& at(NodeId leaf) const;
  bool contains(NodeId leaf) const { return values_.contains(leaf); }

 private:
  std::unordered_map<NodeId, Tensor> values_;
};

/// Values of every node after a forward pass.
class Evaluation {
 public:
  const Tensor& value(NodeId id) const { return values_.at(id); }
  const Tensor& output() const { return values_.at(output_); }
  NodeId output_id() const noexcept { return output_; }

 private:
  friend Evaluation evaluate(const Graph&, const Bindings&);
  std::vector<Tensor> values_;
  NodeId output_ = 0;
};

struct GradientResult {
  double value = 0.0;
  std::map<NodeId, Tensor> grads;  // one entry per parameter leaf

  const Tensor& grad(NodeId leaf) const { return grads.at(leaf); }
};

/// Evaluates every node. Throws ShapeError naming the offending node,
/// NonFiniteError on NaN/Inf, LogDomainError on log of a nonpositive value.
Evaluation evaluate(const Graph& graph, const Bindings& inputs);

/// Value of the output node.
Tensor forward(const Graph& graph, const Bindings& inputs);

/// Reverse accumulation from a scalar output to every parameter leaf.
GradientResult backward(const Graph& graph, const Bindings& inputs);
GradientResult backward(const Graph& graph, const Evaluation& evaluation);

}  // namespace kgan::diff
