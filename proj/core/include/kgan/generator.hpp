#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kgan/diff/graph.hpp"
#include "kgan/diff/tensor.hpp"

namespace kgan::generator {

using diff::Tensor;

enum class Activation { Relu, Tanh, Sigmoid, Linear };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

/// Fully connected network: widths = {input, hidden..., output}, one
/// activation per affine layer.
struct MlpSpec {
  std::vector<std::size_t> widths;
  std::vector<Activation> activations;

  void validate() const;
  std::size_t layers() const noexcept { return widths.empty() ? 0 : widths.size() - 1; }
  std::size_t input_dim() const { return widths.front(); }
  std::size_t output_dim() const { return widths.back(); }

  /// "100-128-relu-128-relu-128-tanh-2-tanh"
  std::string to_string() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Layer weights W_i (widths[i+1] x widths[i]) and biases b_i (widths[i+1]).
/// Used for the generator and for the encoder/decoder of the feature variant.
struct MlpParams {
  MlpSpec spec;
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  std::size_t parameter_count() const;
  void validate() const;

  /// Interleaved W_0, b_0, W_1, b_1, ...
  std::vector<Tensor> tensors() const;
  void assign(const std::vector<Tensor>& tensors);

  std::vector<double> flatten() const;
  static MlpParams unflatten(const MlpSpec& spec, const std::vector<double>& flat);

  double max_abs_weight() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

using GeneratorParams = MlpParams;

/// Glorot-uniform weights, zero biases; deterministic in seed.
MlpParams init_params(const MlpSpec& spec, std::uint64_t seed);

/// Single square linear layer with W = I, b = 0.
MlpParams identity_params(std::size_t dim);

/// Forward pass on a batch of rows.
Tensor generate(const MlpParams& params, const Tensor& inputs);

/// Leaves created for an MLP inside a graph, in MlpParams::tensors() order.
struct MlpNodes {
  std::vector<diff::NodeId> params;
  diff::NodeId output = 0;

  void bind(diff::Bindings& bindings, const MlpParams& values) const;
};

MlpNodes build_mlp(diff::Graph& graph, diff::NodeId input, const MlpSpec& spec, const std::string& prefix,
                   bool differentiable = true);

enum class LatentFamily { StandardNormal, Uniform };

struct LatentSpec {
  std::size_t dim = 1;
  LatentFamily family = LatentFamily::StandardNormal;
  double low = 0.0;
  double high = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Batch `counter` of iid latent draws; identical for identical (seed, counter).
Tensor sample_latent(const LatentSpec& spec, std::size_t n, std::uint64_t counter);

/// Draw counter bookkeeping around sample_latent.
class LatentSampler {
 public:
  explicit LatentSampler(LatentSpec spec) : spec_(std::move(spec)) { spec_.validate(); }
  Tensor next(std::size_t n) { return sample_latent(spec_, n, counter_++); }
  std::uint64_t counter() const noexcept { return counter_; }
  const LatentSpec& spec() const noexcept { return spec_; }

 private:
  LatentSpec spec_;
  std::uint64_t counter_ = 0;
};

}  // namespace kgan::generator
