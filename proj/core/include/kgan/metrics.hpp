#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "kgan/datasets.hpp"
#include "kgan/diff/tensor.hpp"
#include "kgan/generator.hpp"
#include "kgan/kernels.hpp"
#include "kgan/objective.hpp"

namespace kgan::metrics {

using diff::Tensor;

/// Probabilistic classifier over `classes` labels.
class Classifier {
 public:
  using Fn = std::function<std::vector<double>(std::span<const double>)>;
  Classifier(std::size_t classes, Fn fn);

  std::size_t classes() const noexcept { return classes_; }
  /// Probability vector for one point; checked to be a distribution.
  std::vector<double> probabilities(std::span<const double> x) const;

  /// The same vector for every input.
  static Classifier constant(std::vector<double> probabilities);
  /// Exact Bayes posterior p(c|x) proportional to prior_c N(x; mu_c, s^2 I).
  static Classifier mog_posterior(const Tensor& means, double stddev, std::vector<double> prior);
  static Classifier mog_posterior(const datasets::MogSpec& spec);

 private:
  std::size_t classes_;
  Fn fn_;
};

/// Mean distance from each generated point to its nearest training point.
double enn(const Tensor& gen_samples, const Tensor& train_set);

/// Unbiased squared-MMD U-statistic with an unnormalized kernel.
double mmd(const Tensor& x, const Tensor& y, const kernels::KernelSpec& spec);

/// kn_objective with held-out data in the data slot.
objective::ObjectiveReport jsd_estimate(const Tensor& held_out, const Tensor& gen_samples,
                                        const kernels::KernelSpec& spec, double phi = 0.0);

/// -sum_c p_c log p_c with 0 log 0 = 0.
double entropy(std::span<const double> p);

/// Mean predictive entropy over the samples.
double expected_entropy(const Tensor& gen_samples, const Classifier& clf);

/// exp(mean_x KL(p(.|x) || prior)).
double classifier_score(const Tensor& gen_samples, const Classifier& clf, const std::vector<double>& prior);

struct CarpetGrid {
  std::vector<std::vector<double>> corners;  // z1..z4
  std::size_t resolution = 0;
  /// entropy[i][j] at mesh point (x_i, y_j).
  std::vector<std::vector<double>> entropy;
};

/// Classifier entropy over g(x y z1 + (1-x) y z2 + x (1-y) z3 + (1-x)(1-y) z4)
/// on a uniform R x R mesh of [0,1]^2. `to_data` maps generator outputs into
/// the classifier's coordinates (identity when empty).
CarpetGrid entropy_carpet(const generator::MlpParams& params, const std::vector<std::vector<double>>& corners,
                          std::size_t resolution, const Classifier& clf,
                          const std::function<Tensor(const Tensor&)>& to_data = {});

struct MetricRow {
  std::string name;
  double value = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Columns name, value, n_samples, seed.
void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path);
void write_carpet_csv(const CarpetGrid& grid, const std::filesystem::path& path);

/// Modes whose 3-stddev disc receives at least `min_fraction` of the samples.
std::size_t mode_coverage(const Tensor& samples, const datasets::MogSpec& spec, double min_fraction = 0.01,
                          double radius_in_stddevs = 3.0);

}  // namespace kgan::metrics
