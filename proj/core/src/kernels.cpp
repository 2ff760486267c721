#include "kgan/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kgan/error.hpp"

namespace kgan::kernels {

void KernelSpec::validate() const {
  if (bandwidths.empty()) throw InvalidArgument("kernel: bandwidth set is empty");
  for (double s : bandwidths) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidArgument("kernel: bandwidth must be positive and finite, got " + std::to_string(s));
    }
  }
  if (dim == 0) throw InvalidArgument("kernel: dimension must be >= 1");
}

double KernelSpec::min_bandwidth() const { return *std::min_element(bandwidths.begin(), bandwidths.end()); }

double normalization(double sigma, bool normalize, std::size_t k) {
  if (!normalize) return 1.0;
  const double kd = static_cast<double>(k);
  return std::pow(2.0 * std::numbers::pi, -0.5 * kd) * std::pow(sigma, -kd);
}

double rbf_from_squared_norm(double squared_norm, double sigma, bool normalize, std::size_t k) {
  if (!(sigma > 0.0)) throw InvalidArgument("rbf: sigma must be positive, got " + std::to_string(sigma));
  return normalization(sigma, normalize, k) * std::exp(-squared_norm / (2.0 * sigma * sigma));
}

double rbf(std::span<const double> u, double sigma, bool normalize, std::size_t k) {
  double sq = 0.0;
  for (double x : u) sq += x * x;
  return rbf_from_squared_norm(sq, sigma, normalize, k);
}

double mixture_from_squared_norm(double squared_norm, const KernelSpec& spec) {
  spec.validate();
  double acc = 0.0;
  for (double s : spec.bandwidths) acc += rbf_from_squared_norm(squared_norm, s, spec.normalize, spec.dim);
  return acc / static_cast<double>(spec.bandwidths.size());
}

double mixture_eval(std::span<const double> u, const KernelSpec& spec) {
  double sq = 0.0;
  for (double x : u) sq += x * x;
  return mixture_from_squared_norm(sq, spec);
}

double kernel_at_zero(const KernelSpec& spec) { return mixture_from_squared_norm(0.0, spec); }

BandwidthSchedule BandwidthSchedule::constant(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("schedule: constant sigma must be positive");
  BandwidthSchedule s;
  s.kind_ = Kind::Constant;
  s.initial_ = sigma;
  s.floor_ = sigma;
  return s;
}

BandwidthSchedule BandwidthSchedule::ladder(std::vector<Phase> phases) {
  if (phases.empty()) throw InvalidArgument("schedule: ladder needs at least one phase");
  for (const Phase& p : phases) {
    if (!(p.sigma > 0.0)) throw InvalidArgument("schedule: ladder sigma must be positive");
    if (p.iterations == 0) throw InvalidArgument("schedule: ladder phase length must be positive");
  }
  BandwidthSchedule s;
  s.kind_ = Kind::Ladder;
  s.phases_ = std::move(phases);
  s.initial_ = s.phases_.front().sigma;
  return s;
}

BandwidthSchedule BandwidthSchedule::geometric(double initial, double decay, double floor) {
  if (!(initial > 0.0)) throw InvalidArgument("schedule: geometric initial sigma must be positive");
  if (!(decay > 0.0 && decay <= 1.0)) throw InvalidArgument("schedule: geometric decay must lie in (0, 1]");
  if (!(floor > 0.0)) throw InvalidArgument("schedule: geometric floor must be positive");
  BandwidthSchedule s;
  s.kind_ = Kind::Geometric;
  s.initial_ = initial;
  s.decay_ = decay;
  s.floor_ = floor;
  return s;
}

double BandwidthSchedule::current() const {
  switch (kind_) {
    case Kind::Constant: return initial_;
    case Kind::Ladder: return phases_[phase_].sigma;
    case Kind::Geometric:
      return std::max(floor_, initial_ * std::pow(decay_, static_cast<double>(iteration_)));
  }
  return initial_;
}

double BandwidthSchedule::step() {
  const double sigma = current();
  ++iteration_;
  if (kind_ == Kind::Ladder) {
    ++in_phase_;
    if (in_phase_ >= phases_[phase_].iterations && phase_ + 1 < phases_.size()) {
      ++phase_;
      in_phase_ = 0;
    }
  }
  return sigma;
}

std::size_t BandwidthSchedule::total_iterations() const noexcept {
  std::size_t total = 0;
  for (const Phase& p : phases_) total += p.iterations;
  return total;
}

}  // namespace kgan::kernels
