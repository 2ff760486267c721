#pragma once

#include <optional>
#include <span>

#include "kgan/density.hpp"
#include "kgan/diff/graph.hpp"
#include "kgan/kernels.hpp"

namespace kgan::objective {

using diff::Tensor;
using kernels::KernelSpec;

/// Value of the kernel objective and its split into the data-point sum
/// (term1, reported as JSD-F) and the generated-point sum (term2, JSD-S).
struct ObjectiveReport {
  double total = 0.0;
  double term1 = 0.0;
  double term2 = 0.0;
  double phi = 0.0;
  KernelSpec spec;
};

/// term1 = mean_i log[(p(X_i)+phi) / (p(X_i)+p_g(X_i)+2phi)]
/// term2 = mean_i log[(p_g(G_i)+phi) / (p(G_i)+p_g(G_i)+2phi)]
/// where p, p_g are the data and generator KDEs. Throws UnderflowError if a
/// log argument is not positive.
ObjectiveReport kn_objective(const Tensor& data, const Tensor& gen, const KernelSpec& spec, double phi = 0.0);

/// Same reduction applied to precomputed densities.
ObjectiveReport report_from_kdes(const density::KdeBatch& kdes, const KernelSpec& spec, double phi);

/// Differentiable objective nodes.
struct ObjectiveNodes {
  diff::NodeId total;
  diff::NodeId term1;
  diff::NodeId term2;
};

ObjectiveNodes build_objective(diff::Graph& graph, const density::KdeInputs& inputs, const KernelSpec& spec,
                               double phi);

/// Reads the three objective values out of an evaluated graph.
ObjectiveReport read_report(const diff::Evaluation& ev, const ObjectiveNodes& nodes, const KernelSpec& spec,
                            double phi);

/// Closed-form discriminator sum_i K(x-X_i) / (sum_i K(x-X_i) + sum_j K(x-G_j)).
double optimal_discriminator(std::span<const double> x, const Tensor& data, const Tensor& gen,
                             const KernelSpec& spec);

/// Indicator-ratio discriminator of the unsmoothed empirical problem.
/// Empty when x is neither a data nor a generated point.
std::optional<double> discrete_discriminator(std::span<const double> x, const Tensor& data, const Tensor& gen);

struct CorrectionTerms {
  double k1 = 0.0;
  double k2 = 0.0;
};

/// Monte-Carlo correction sums evaluated at points drawn from mu / mu(X):
/// k1 = mu(X)/m sum log[(p+phi)/(p+p_g+2phi)], k2 likewise with p_g on top.
/// Requires phi > 0 and mu_volume > 0.
CorrectionTerms correction_terms(const Tensor& mu_samples, const Tensor& data, const Tensor& gen,
                                 const KernelSpec& spec, double phi, double mu_volume);

/// kn_objective total plus both correction sums, unit weights.
double augmented_objective(const ObjectiveReport& report, const CorrectionTerms& terms);

/// Throws UnderflowError with remediation hints.
[[noreturn]] void throw_underflow(const std::string& where, double phi);

}  // namespace kgan::objective
