#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace kgan::kernels {

/// Gaussian RBF K(u) = exp(-||u||^2 / (2 sigma^2)), optionally times
/// (2 pi)^(-k/2) sigma^(-k). A KernelSpec with several bandwidths is the
/// arithmetic mean of its components.
struct KernelSpec {
  std::vector<double> bandwidths{1.0};
  bool normalize = false;
  std::size_t dim = 1;

  /// Throws InvalidArgument on an empty bandwidth set, sigma <= 0 or dim == 0.
  void validate() const;

  KernelSpec with_bandwidth(double sigma) const {
    KernelSpec s = *this;
    s.bandwidths = {sigma};
    return s;
  }
  KernelSpec with_dim(std::size_t k) const {
    KernelSpec s = *this;
    s.dim = k;
    return s;
  }
  double min_bandwidth() const;
};

/// Normalization constant (2 pi)^(-k/2) sigma^(-k), or 1 when off.
double normalization(double sigma, bool normalize, std::size_t k);

double rbf(std::span<const double> u, double sigma, bool normalize, std::size_t k);

/// Same kernel expressed through the squared norm ||u||^2.
double rbf_from_squared_norm(double squared_norm, double sigma, bool normalize, std::size_t k);

double mixture_eval(std::span<const double> u, const KernelSpec& spec);
double mixture_from_squared_norm(double squared_norm, const KernelSpec& spec);

/// Kernel value at u = 0 (the self-term of a KDE).
double kernel_at_zero(const KernelSpec& spec);

/// Bandwidth annealing schedule. Single-owner mutable state: step() returns
/// the bandwidth for the current iteration and advances.
class BandwidthSchedule {
 public:
  enum class Kind { Constant, Ladder, Geometric };

  struct Phase {
    double sigma;
    std::size_t iterations;
    friend bool operator==(const Phase&, const Phase&) = default;
  };

  static BandwidthSchedule constant(double sigma);
  static BandwidthSchedule ladder(std::vector<Phase> phases);
  /// sigma_t = max(floor, initial * decay^t)
  static BandwidthSchedule geometric(double initial, double decay, double floor);

  double step();
  double current() const;

  Kind kind() const noexcept { return kind_; }
  std::size_t iteration() const noexcept { return iteration_; }
  const std::vector<Phase>& phases() const noexcept { return phases_; }
  double initial() const noexcept { return initial_; }
  double decay() const noexcept { return decay_; }
  double floor() const noexcept { return floor_; }

  /// Index of the ladder phase in effect (last phase once exhausted); 0 otherwise.
  std::size_t phase_index() const noexcept { return phase_; }
  /// Sum of ladder phase lengths; 0 for the other kinds.
  std::size_t total_iterations() const noexcept;

  friend bool operator==(const BandwidthSchedule&, const BandwidthSchedule&) = default;

 private:
  BandwidthSchedule() = default;

  Kind kind_ = Kind::Constant;
  std::vector<Phase> phases_;
  double initial_ = 1.0;
  double decay_ = 1.0;
  double floor_ = 1.0;
  std::size_t iteration_ = 0;
  std::size_t phase_ = 0;
  std::size_t in_phase_ = 0;
};

}  // namespace kgan::kernels
