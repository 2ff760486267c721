#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "kgan/diff/tensor.hpp"

namespace kgan::training {

using diff::Tensor;

struct RmspropConfig {
  double lr = 1e-3;
  double decay = 0.9;
  double eps = 1e-8;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using OptimizerConfig = std::variant<RmspropConfig, AdamConfig>;

void validate(const OptimizerConfig& config);

struct RmspropState {
  std::vector<Tensor> mean_square;
};

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::size_t steps = 0;
};

/// s' = decay*s + (1-decay)*g^2 ;  p' = p - lr*g/(sqrt(s') + eps).
/// An empty state is initialized to zeros on first use.
void rmsprop_update(std::vector<Tensor>& params, const std::vector<Tensor>& grads, RmspropState& state, double lr,
                    double decay, double eps);

/// Bias-corrected Adam step.
void adam_update(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state, double lr,
                 double beta1, double beta2, double eps);

/// Owns a configuration and matching state; minimizes by default.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  /// Applies one descent step p <- p - update(g).
  void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads);

  const OptimizerConfig& config() const noexcept { return config_; }
  double learning_rate() const;

 private:
  OptimizerConfig config_;
  RmspropState rmsprop_;
  AdamState adam_;
};

/// Euclidean norm over all tensors.
double global_norm(const std::vector<Tensor>& tensors);

}  // namespace kgan::training
