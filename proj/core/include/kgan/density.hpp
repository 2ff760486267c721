#pragma once

#include <vector>

#include "kgan/diff/graph.hpp"
#include "kgan/diff/tensor.hpp"
#include "kgan/generator.hpp"
#include "kgan/kernels.hpp"

namespace kgan::density {

using diff::Tensor;
using kernels::KernelSpec;

/// ||a_i - b_j||^2 through the ||a||^2 + ||b||^2 - 2 a.b expansion, with
/// round-off negatives clamped to zero.
Tensor squared_distances(const Tensor& a, const Tensor& b);

/// Kernel density estimate at each query: mean over references of the
/// (mixture) kernel. Queries that coincide with a reference keep their
/// self-term. Points are rows; spec.dim must equal the point dimension.
std::vector<double> kde(const Tensor& queries, const Tensor& references, const KernelSpec& spec);

/// The four density vectors entering the objective.
struct KdeBatch {
  std::vector<double> p_hat_at_data;    // data KDE at data points
  std::vector<double> p_theta_at_data;  // generator KDE at data points
  std::vector<double> p_hat_at_gen;     // data KDE at generated points
  std::vector<double> p_theta_at_gen;   // generator KDE at generated points
};

/// Equal batch sizes are required. Uses the data-data, data-gen and gen-gen
/// Gram blocks; the data-gen block serves both orientations.
KdeBatch kde_batch(const Tensor& data, const Tensor& gen, const KernelSpec& spec);

/// kde_batch evaluated on encoder features f(data), f(gen). spec.dim must
/// equal the encoder output width.
KdeBatch feature_kde_batch(const Tensor& data, const Tensor& gen, const generator::MlpParams& encoder,
                           const KernelSpec& spec);

/// Differentiable kernel matrix from a squared-distance node.
diff::NodeId kernel_node(diff::Graph& graph, diff::NodeId squared_distance, const KernelSpec& spec);

/// Graph nodes holding the four KDE vectors.
struct KdeNodes {
  diff::NodeId p_hat_at_data;
  diff::NodeId p_theta_at_data;
  diff::NodeId p_hat_at_gen;
  diff::NodeId p_theta_at_gen;
};

/// Points entering the differentiable KDEs. Generated points play three
/// roles (queries, references for the data-point KDE, references for the
/// generated-point KDE); in training all three are the same node, tests
/// split them to check each gradient path separately.
struct KdeInputs {
  diff::NodeId data;
  diff::NodeId gen_query;
  diff::NodeId gen_ref_for_data;
  diff::NodeId gen_ref_for_gen;

  static KdeInputs shared(diff::NodeId data, diff::NodeId gen) { return {data, gen, gen, gen}; }
};

KdeNodes build_kde_batch(diff::Graph& graph, const KdeInputs& in, const KernelSpec& spec);

}  // namespace kgan::density
