#include "kgan/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "kgan/error.hpp"
#include "kgan/random.hpp"

namespace kgan::generator {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Linear: return "linear";
  }
  return "linear";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "linear") return Activation::Linear;
  throw InvalidArgument("unknown activation '" + name + "' (expected relu, tanh, sigmoid or linear)");
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw InvalidArgument("mlp: need at least an input and an output width");
  for (std::size_t w : widths) {
    if (w == 0) throw InvalidArgument("mlp: layer widths must be positive");
  }
  if (activations.size() != widths.size() - 1) {
    throw InvalidArgument("mlp: " + std::to_string(widths.size() - 1) + " layers but " +
                          std::to_string(activations.size()) + " activations");
  }
}

std::string MlpSpec::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) os << '-';
    os << widths[i];
    if (i > 0 && i - 1 < activations.size()) os << '-' << activation_name(activations[i - 1]);
  }
  return os.str();
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& w : weights) n += w.size();
  for (const Tensor& b : biases) n += b.size();
  return n;
}

void MlpParams::validate() const {
  spec.validate();
  if (weights.size() != spec.layers() || biases.size() != spec.layers()) {
    throw ShapeError("mlp params: layer count does not match spec " + spec.to_string());
  }
  for (std::size_t i = 0; i < spec.layers(); ++i) {
    if (weights[i].shape() != diff::Shape{spec.widths[i + 1], spec.widths[i]} ||
        biases[i].shape() != diff::Shape{spec.widths[i + 1]}) {
      throw ShapeError("mlp params: layer " + std::to_string(i) + " has shapes " +
                       diff::shape_string(weights[i].shape()) + " / " + diff::shape_string(biases[i].shape()));
    }
    if (!weights[i].all_finite() || !biases[i].all_finite()) {
      throw NonFiniteError("mlp params: layer " + std::to_string(i) + " holds non-finite values");
    }
  }
}

std::vector<Tensor> MlpParams::tensors() const {
  std::vector<Tensor> out;
  out.reserve(2 * weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.push_back(weights[i]);
    out.push_back(biases[i]);
  }
  return out;
}

void MlpParams::assign(const std::vector<Tensor>& tensors) {
  if (tensors.size() != 2 * weights.size()) throw ShapeError("mlp params: tensor count mismatch in assign");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (tensors[2 * i].shape() != weights[i].shape() || tensors[2 * i + 1].shape() != biases[i].shape()) {
      throw ShapeError("mlp params: shape mismatch in assign at layer " + std::to_string(i));
    }
    weights[i] = tensors[2 * i];
    biases[i] = tensors[2 * i + 1];
  }
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    flat.insert(flat.end(), weights[i].data().begin(), weights[i].data().end());
    flat.insert(flat.end(), biases[i].data().begin(), biases[i].data().end());
  }
  return flat;
}

MlpParams MlpParams::unflatten(const MlpSpec& spec, const std::vector<double>& flat) {
  spec.validate();
  MlpParams p;
  p.spec = spec;
  std::size_t pos = 0;
  auto take = [&](diff::Shape shape) {
    const std::size_t n = diff::shape_size(shape);
    if (pos + n > flat.size()) throw FormatError("mlp params: flat vector too short for spec " + spec.to_string());
    Tensor t(std::move(shape), std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                                                    flat.begin() + static_cast<std::ptrdiff_t>(pos + n)));
    pos += n;
    return t;
  };
  for (std::size_t i = 0; i < spec.layers(); ++i) {
    p.weights.push_back(take({spec.widths[i + 1], spec.widths[i]}));
    p.biases.push_back(take({spec.widths[i + 1]}));
  }
  if (pos != flat.size()) throw FormatError("mlp params: flat vector too long for spec " + spec.to_string());
  return p;
}

double MlpParams::max_abs_weight() const {
  double m = 0.0;
  for (const Tensor& w : weights) {
    for (double v : w.data()) m = std::max(m, std::abs(v));
  }
  return m;
}

MlpParams init_params(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  MlpParams p;
  p.spec = spec;
  Rng rng = make_rng(seed, {0x1417});
  for (std::size_t i = 0; i < spec.layers(); ++i) {
    const std::size_t fan_in = spec.widths[i];
    const std::size_t fan_out = spec.widths[i + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Tensor w = Tensor::matrix(fan_out, fan_in);
    for (double& v : w.data()) v = dist(rng);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(diff::Shape{fan_out}, 0.0);
  }
  return p;
}

MlpParams identity_params(std::size_t dim) {
  MlpParams p;
  p.spec = MlpSpec{{dim, dim}, {Activation::Linear}};
  Tensor w = Tensor::matrix(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) w.at(i, i) = 1.0;
  p.weights.push_back(std::move(w));
  p.biases.emplace_back(diff::Shape{dim}, 0.0);
  return p;
}

void MlpNodes::bind(diff::Bindings& bindings, const MlpParams& values) const {
  const auto tensors = values.tensors();
  if (tensors.size() != params.size()) throw ShapeError("mlp nodes: parameter count mismatch in bind");
  for (std::size_t i = 0; i < params.size(); ++i) bindings.bind(params[i], tensors[i]);
}

MlpNodes build_mlp(diff::Graph& graph, diff::NodeId input, const MlpSpec& spec, const std::string& prefix,
                   bool differentiable) {
  spec.validate();
  MlpNodes nodes;
  diff::NodeId h = input;
  for (std::size_t i = 0; i < spec.layers(); ++i) {
    const std::string layer = prefix + ".layer" + std::to_string(i);
    const diff::NodeId w = differentiable ? graph.parameter(layer + ".weight") : graph.input(layer + ".weight");
    const diff::NodeId b = differentiable ? graph.parameter(layer + ".bias") : graph.input(layer + ".bias");
    nodes.params.push_back(w);
    nodes.params.push_back(b);
    h = graph.affine(h, w, b);
    graph.name(h, layer);
    switch (spec.activations[i]) {
      case Activation::Relu: h = graph.relu(h); break;
      case Activation::Tanh: h = graph.tanh(h); break;
      case Activation::Sigmoid: h = graph.sigmoid(h); break;
      case Activation::Linear: break;
    }
  }
  nodes.output = h;
  return nodes;
}

Tensor generate(const MlpParams& params, const Tensor& inputs) {
  params.validate();
  if (inputs.rank() != 2 || inputs.cols() != params.spec.input_dim()) {
    throw ShapeError("generate: inputs " + diff::shape_string(inputs.shape()) + " do not match network input width " +
                     std::to_string(params.spec.input_dim()));
  }
  diff::Graph g;
  const diff::NodeId x = g.input("inputs");
  const MlpNodes nodes = build_mlp(g, x, params.spec, "mlp", false);
  g.set_output(nodes.output);
  diff::Bindings b;
  b.bind(x, inputs);
  nodes.bind(b, params);
  return diff::forward(g, b);
}

void LatentSpec::validate() const {
  if (dim == 0) throw InvalidArgument("latent: dimension must be >= 1");
  if (family == LatentFamily::Uniform && !(low < high)) throw InvalidArgument("latent: uniform needs low < high");
}

Tensor sample_latent(const LatentSpec& spec, std::size_t n, std::uint64_t counter) {
  spec.validate();
  if (n == 0) throw InvalidArgument("sample_latent: n must be >= 1");
  Rng rng = make_rng(spec.seed, {0x1a7e, counter});
  Tensor z = Tensor::matrix(n, spec.dim);
  if (spec.family == LatentFamily::StandardNormal) {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : z.data()) v = dist(rng);
  } else {
    std::uniform_real_distribution<double> dist(spec.low, spec.high);
    const double top = std::nextafter(spec.high, spec.low);
    for (double& v : z.data()) v = std::min(dist(rng), top);
  }
  return z;
}

}  // namespace kgan::generator
