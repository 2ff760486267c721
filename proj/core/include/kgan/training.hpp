#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "kgan/diff/tensor.hpp"
#include "kgan/error.hpp"
#include "kgan/generator.hpp"
#include "kgan/kernels.hpp"
#include "kgan/objective.hpp"
#include "kgan/optimizer.hpp"
#include "kgan/random.hpp"

namespace kgan::training {

using generator::MlpParams;
using generator::MlpSpec;

/// Encoder/decoder pair trained adversarially against the generator.
struct FeatureConfig {
  bool enabled = false;
  MlpSpec encoder;
  MlpSpec decoder;
  /// Start the encoder at W = I, b = 0 (requires a single square layer).
  bool identity_encoder = false;
  double reconstruction_weight = 100.0;
  double clip = 0.01;
  std::size_t psi_steps = 5;
};

struct TrainConfig {
  MlpSpec generator;
  generator::LatentSpec latent;
  kernels::KernelSpec kernel;
  /// When set, replaces kernel.bandwidths with {sigma_t} at every step.
  std::optional<kernels::BandwidthSchedule> schedule;
  double phi = 0.0;
  std::size_t batch_size = 256;
  OptimizerConfig optimizer = RmspropConfig{};
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::size_t eval_every = 100;
  /// Zero the last layer so an untrained generator emits f(0) everywhere.
  bool zero_output_layer = false;
  /// Write 0 in the wall_ms column so histories are byte-reproducible.
  bool record_wall_time = true;
  FeatureConfig feature;

  void validate() const;
};

struct HistoryRecord {
  std::size_t iter = 0;
  double sigma = 0.0;
  double kn = 0.0;
  double jsd_f = 0.0;
  double jsd_s = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
  friend bool operator==(const HistoryRecord&, const HistoryRecord&) = default;
};

struct TrainHistory {
  std::vector<HistoryRecord> records;
  MlpParams final_params;
  std::optional<MlpParams> final_encoder;
  std::optional<MlpParams> final_decoder;

  void write_csv(const std::filesystem::path& path) const;
};

/// Epoch shuffling without replacement: a fresh permutation is drawn when
/// fewer than n unused indices remain.
class MinibatchSampler {
 public:
  MinibatchSampler(std::size_t pool_size, std::size_t batch, Rng rng);
  std::vector<std::size_t> next();

 private:
  std::size_t pool_size_;
  std::size_t batch_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t position_;
};

/// Everything that evolves during training.
struct TrainState {
  TrainConfig config;
  MlpParams params;
  Optimizer optimizer;
  std::optional<kernels::BandwidthSchedule> schedule;
  generator::LatentSampler latent;
  MinibatchSampler batches;
  std::size_t iteration = 0;

  std::optional<MlpParams> encoder{};
  std::optional<MlpParams> decoder{};
  std::optional<Optimizer> psi_optimizer{};
  std::optional<generator::LatentSampler> psi_latent{};
  std::optional<MinibatchSampler> psi_batches{};
};

/// Fresh state for `config` over a pool of `pool_size` points.
TrainState make_state(const TrainConfig& config, std::size_t pool_size);

/// Values seen by one update, all measured before the parameters move.
struct StepReport {
  std::size_t iter = 0;
  double sigma = 0.0;
  objective::ObjectiveReport objective;
  double grad_norm = 0.0;
};

struct PsiReport {
  objective::ObjectiveReport objective;
  double reconstruction = 0.0;
};

/// Kernel spec in effect at the current step.
kernels::KernelSpec current_kernel(const TrainState& state, std::size_t dim);

/// Objective and generator gradient on an explicit batch, without updating.
struct GradientReport {
  objective::ObjectiveReport objective;
  std::vector<diff::Tensor> grads;
};
GradientReport generator_gradient(const TrainState& state, const diff::Tensor& batch, const diff::Tensor& latent,
                                  const kernels::KernelSpec& spec);

/// One ascent step on the encoder/decoder for an explicit batch, followed by
/// clipping every encoder and decoder entry into [-clip, clip].
PsiReport psi_step(TrainState& state, const diff::Tensor& batch, const diff::Tensor& latent,
                   const kernels::KernelSpec& spec);

/// Samples a minibatch and latent batch, takes one optimizer step on the
/// generator and advances the bandwidth schedule.
StepReport train_step(TrainState& state, const diff::Tensor& data_pool);

/// psi_steps encoder/decoder ascent steps then one generator step.
StepReport feature_adversarial_step(TrainState& state, const diff::Tensor& data_pool);

/// Carries the records gathered before a failure.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, TrainHistory partial, std::exception_ptr cause)
      : Error(what), partial_(std::move(partial)), cause_(std::move(cause)) {}
  const TrainHistory& partial() const noexcept { return partial_; }
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  TrainHistory partial_;
  std::exception_ptr cause_;
};

/// Called after every step with the state and the step report.
using StepObserver = std::function<void(const TrainState&, const StepReport&)>;

/// Runs config.iterations steps. The first record (iter 0) evaluates the
/// initial generator on a separate batch; a record is then kept every
/// eval_every steps and after the final step.
TrainHistory train(const TrainConfig& config, const diff::Tensor& data, const StepObserver& observer = {});

}  // namespace kgan::training
