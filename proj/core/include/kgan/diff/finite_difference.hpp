#pragma once

#include <functional>
#include <vector>

#include "kgan/diff/tensor.hpp"

namespace kgan::diff {

using ScalarFunction = std::function<double(const std::vector<Tensor>&)>;

/// Central-difference gradient (f(p+h) - f(p-h)) / 2h, one coordinate at a time.
/// Independent of the reverse-mode engine; used as its test oracle.
std::vector<Tensor> fd_grad(const ScalarFunction& f, std::vector<Tensor> params, double h = 1e-5);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor) over all entries of all tensors.
double max_relative_error(const std::vector<Tensor>& a, const std::vector<Tensor>& b, double floor = 1e-8);

}  // namespace kgan::diff
