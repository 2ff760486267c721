#include "kgan/diff/finite_difference.hpp"

#include <algorithm>
#include <cmath>

#include "kgan/error.hpp"

namespace kgan::diff {

std::vector<Tensor> fd_grad(const ScalarFunction& f, std::vector<Tensor> params, double h) {
  if (!(h > 0.0)) throw InvalidArgument("fd_grad: step h must be positive");
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (const Tensor& p : params) grads.emplace_back(p.shape(), 0.0);
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double orig = params[t][i];
      params[t][i] = orig + h;
      const double up = f(params);
      params[t][i] = orig - h;
      const double down = f(params);
      params[t][i] = orig;
      grads[t][i] = (up - down) / (2.0 * h);
    }
  }
  return grads;
}

double max_relative_error(const std::vector<Tensor>& a, const std::vector<Tensor>& b, double floor) {
  if (a.size() != b.size()) throw ShapeError("max_relative_error: tensor count mismatch");
  double worst = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].shape() != b[t].shape()) throw ShapeError("max_relative_error: shape mismatch");
    for (std::size_t i = 0; i < a[t].size(); ++i) {
      const double denom = std::max({std::abs(a[t][i]), std::abs(b[t][i]), floor});
      worst = std::max(worst, std::abs(a[t][i] - b[t][i]) / denom);
    }
  }
  return worst;
}

}  // namespace kgan::diff
