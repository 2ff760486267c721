#include "kgan/optimizer.hpp"

#include <cmath>

#include "kgan/error.hpp"

namespace kgan::training {
namespace {

void check_shapes(const std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("optimizer: " + std::to_string(params.size()) + " parameter tensors but " +
                     std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape()) {
      throw ShapeError("optimizer: tensor " + std::to_string(i) + " has shape " + diff::shape_string(params[i].shape()) +
                       " but its gradient " + diff::shape_string(grads[i].shape()));
    }
  }
}

void zero_like(std::vector<Tensor>& state, const std::vector<Tensor>& params) {
  if (!state.empty()) return;
  state.reserve(params.size());
  for (const Tensor& p : params) state.emplace_back(p.shape(), 0.0);
}

}  // namespace

void validate(const OptimizerConfig& config) {
  if (const auto* r = std::get_if<RmspropConfig>(&config)) {
    if (!(r->lr >= 0.0)) throw InvalidArgument("rmsprop: lr must be >= 0");
    if (!(r->decay >= 0.0 && r->decay < 1.0)) throw InvalidArgument("rmsprop: decay must lie in [0, 1)");
    if (!(r->eps >= 0.0)) throw InvalidArgument("rmsprop: eps must be >= 0");
  } else {
    const auto& a = std::get<AdamConfig>(config);
    if (!(a.lr >= 0.0)) throw InvalidArgument("adam: lr must be >= 0");
    if (!(a.beta1 >= 0.0 && a.beta1 < 1.0) || !(a.beta2 >= 0.0 && a.beta2 < 1.0)) {
      throw InvalidArgument("adam: betas must lie in [0, 1)");
    }
    if (!(a.eps >= 0.0)) throw InvalidArgument("adam: eps must be >= 0");
  }
}

void rmsprop_update(std::vector<Tensor>& params, const std::vector<Tensor>& grads, RmspropState& state, double lr,
                    double decay, double eps) {
  check_shapes(params, grads);
  zero_like(state.mean_square, params);
  check_shapes(params, state.mean_square);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t].data();
    auto g = grads[t].data();
    auto s = state.mean_square[t].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      s[i] = decay * s[i] + (1.0 - decay) * g[i] * g[i];
      if (g[i] != 0.0) p[i] -= lr * g[i] / (std::sqrt(s[i]) + eps);
    }
  }
}

void adam_update(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state, double lr,
                 double beta1, double beta2, double eps) {
  check_shapes(params, grads);
  zero_like(state.first_moment, params);
  zero_like(state.second_moment, params);
  ++state.steps;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.steps));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.steps));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t].data();
    auto g = grads[t].data();
    auto m = state.first_moment[t].data();
    auto v = state.second_moment[t].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      if (m_hat != 0.0) p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) { validate(config_); }

void Optimizer::step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
  if (const auto* r = std::get_if<RmspropConfig>(&config_)) {
    rmsprop_update(params, grads, rmsprop_, r->lr, r->decay, r->eps);
  } else {
    const auto& a = std::get<AdamConfig>(config_);
    adam_update(params, grads, adam_, a.lr, a.beta1, a.beta2, a.eps);
  }
}

double Optimizer::learning_rate() const {
  return std::visit([](const auto& c) { return c.lr; }, config_);
}

double global_norm(const std::vector<Tensor>& tensors) {
  double acc = 0.0;
  for (const Tensor& t : tensors) {
    for (double v : t.data()) acc += v * v;
  }
  return std::sqrt(acc);
}

}  // namespace kgan::training
