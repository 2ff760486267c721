#include "kgan/training.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "kgan/density.hpp"
#include "kgan/diff/graph.hpp"

namespace kgan::training {

using diff::Tensor;

namespace {

enum Stream : std::uint64_t {
  kInit = 1,
  kLatent = 2,
  kBatches = 3,
  kEvalBatch = 4,
  kEvalLatent = 5,
  kPsiBatches = 6,
  kPsiLatent = 7,
  kEncoderInit = 8,
  kDecoderInit = 9,
};

MlpParams initial_generator(const TrainConfig& config) {
  MlpParams p = generator::init_params(config.generator, stream_seed(config.seed, {kInit}));
  if (config.zero_output_layer) {
    for (double& v : p.weights.back().data()) v = 0.0;
    for (double& v : p.biases.back().data()) v = 0.0;
  }
  return p;
}

generator::LatentSpec derived_latent(const TrainConfig& config, std::uint64_t stream) {
  generator::LatentSpec spec = config.latent;
  spec.seed = stream_seed(config.seed, {stream});
  return spec;
}

void clip_all(MlpParams& params, double c) {
  for (Tensor& w : params.weights) {
    for (double& v : w.data()) v = std::clamp(v, -c, c);
  }
  for (Tensor& b : params.biases) {
    for (double& v : b.data()) v = std::clamp(v, -c, c);
  }
}

// Re-raises the in-flight error with `context` prepended, keeping its type.
[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const UnderflowError& e) {
    throw UnderflowError(context + ": " + e.what());
  } catch (const NonFiniteError& e) {
    throw NonFiniteError(context + ": " + e.what());
  } catch (const LogDomainError& e) {
    throw LogDomainError(context + ": " + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError(context + ": " + e.what());
  } catch (const Error& e) {
    throw Error(context + ": " + e.what());
  }
}

std::size_t feature_dim(const TrainState& state, const Tensor& batch) {
  return state.encoder ? state.encoder->spec.output_dim() : batch.cols();
}

// Builds f(x) for the data and generated batches from two copies of the
// encoder sharing the same values. Without an encoder both pass through.
struct FeatureNodes {
  diff::NodeId data;
  diff::NodeId gen;
  std::optional<generator::MlpNodes> on_data;
  std::optional<generator::MlpNodes> on_gen;
};

FeatureNodes build_features(diff::Graph& g, diff::NodeId x, diff::NodeId gen, const std::optional<MlpParams>& encoder,
                            bool differentiable) {
  if (!encoder) return {x, gen, std::nullopt, std::nullopt};
  auto on_data = generator::build_mlp(g, x, encoder->spec, "enc_x", differentiable);
  auto on_gen = generator::build_mlp(g, gen, encoder->spec, "enc_g", differentiable);
  return {on_data.output, on_gen.output, on_data, on_gen};
}

// A zero density reaches the graph as log(0) or 0/0. The eager objective on
// the same points reports that case as an underflow with remediation hints.
diff::Evaluation evaluate_objective(const diff::Graph& g, const diff::Bindings& b, const TrainState& state,
                                    const Tensor& batch, const Tensor& latent, const kernels::KernelSpec& spec) {
  try {
    return diff::evaluate(g, b);
  } catch (const LogDomainError&) {
  } catch (const NonFiniteError&) {
  }
  const Tensor gen = generator::generate(state.params, latent);
  if (state.encoder) {
    objective::report_from_kdes(density::feature_kde_batch(batch, gen, *state.encoder, spec), spec, state.config.phi);
  } else {
    objective::kn_objective(batch, gen, spec, state.config.phi);
  }
  // the eager path succeeded, so the failure was not in the densities
  return diff::evaluate(g, b);
}

}  // namespace

void TrainConfig::validate() const {
  generator.validate();
  latent.validate();
  kernel.validate();
  if (latent.dim != generator.input_dim()) {
    throw InvalidArgument("latent.dim " + std::to_string(latent.dim) + " does not match generator input width " +
                          std::to_string(generator.input_dim()));
  }
  if (batch_size < 2) throw InvalidArgument("batch_size must be >= 2");
  if (!(phi >= 0.0)) throw InvalidArgument("phi must be >= 0");
  if (eval_every < 1) throw InvalidArgument("eval_every must be >= 1");
  if (std::visit([](const auto& c) { return !(c.lr > 0.0); }, optimizer)) {
    throw InvalidArgument("optimizer.lr must be > 0");
  }
  training::validate(optimizer);
  if (feature.enabled) {
    feature.encoder.validate();
    feature.decoder.validate();
    if (feature.encoder.input_dim() != generator.output_dim()) {
      throw InvalidArgument("feature.encoder input width must equal the data dimension " +
                            std::to_string(generator.output_dim()));
    }
    if (feature.decoder.input_dim() != feature.encoder.output_dim() ||
        feature.decoder.output_dim() != generator.output_dim()) {
      throw InvalidArgument("feature.decoder must map encoder features back to the data dimension");
    }
    if (feature.identity_encoder &&
        (feature.encoder.layers() != 1 || feature.encoder.input_dim() != feature.encoder.output_dim() ||
         feature.encoder.activations[0] != generator::Activation::Linear)) {
      throw InvalidArgument("feature.identity_encoder needs a single square linear layer");
    }
    if (!(feature.clip > 0.0)) throw InvalidArgument("feature.clip must be > 0");
    if (!(feature.reconstruction_weight >= 0.0)) throw InvalidArgument("feature.reconstruction_weight must be >= 0");
  }
}

MinibatchSampler::MinibatchSampler(std::size_t pool_size, std::size_t batch, Rng rng)
    : pool_size_(pool_size), batch_(batch), rng_(std::move(rng)), order_(pool_size), position_(pool_size) {
  if (batch_ == 0 || pool_size_ < batch_) {
    throw InvalidArgument("minibatch: pool of " + std::to_string(pool_size_) + " points is smaller than batch " +
                          std::to_string(batch_));
  }
}

std::vector<std::size_t> MinibatchSampler::next() {
  if (pool_size_ - position_ < batch_) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
    position_ = 0;
  }
  std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(position_),
                               order_.begin() + static_cast<std::ptrdiff_t>(position_ + batch_));
  position_ += batch_;
  return out;
}

TrainState make_state(const TrainConfig& config, std::size_t pool_size) {
  config.validate();
  TrainState state{
      .config = config,
      .params = initial_generator(config),
      .optimizer = Optimizer(config.optimizer),
      .schedule = config.schedule,
      .latent = generator::LatentSampler(derived_latent(config, kLatent)),
      .batches = MinibatchSampler(pool_size, config.batch_size, make_rng(config.seed, {kBatches})),
  };
  if (config.feature.enabled) {
    const FeatureConfig& f = config.feature;
    state.encoder = f.identity_encoder ? generator::identity_params(f.encoder.input_dim())
                                       : generator::init_params(f.encoder, stream_seed(config.seed, {kEncoderInit}));
    state.decoder = generator::init_params(f.decoder, stream_seed(config.seed, {kDecoderInit}));
    state.psi_optimizer.emplace(config.optimizer);
    state.psi_latent.emplace(derived_latent(config, kPsiLatent));
    state.psi_batches.emplace(pool_size, config.batch_size, make_rng(config.seed, {kPsiBatches}));
  }
  return state;
}

kernels::KernelSpec current_kernel(const TrainState& state, std::size_t dim) {
  kernels::KernelSpec spec = state.config.kernel.with_dim(dim);
  if (state.schedule) spec.bandwidths = {state.schedule->current()};
  return spec;
}

GradientReport generator_gradient(const TrainState& state, const Tensor& batch, const Tensor& latent,
                                  const kernels::KernelSpec& spec) {
  diff::Graph g;
  const auto x = g.input("data");
  const auto z = g.input("latent");
  const auto gen = generator::build_mlp(g, z, state.params.spec, "gen");
  const FeatureNodes f = build_features(g, x, gen.output, state.encoder, false);
  const auto obj = objective::build_objective(g, density::KdeInputs::shared(f.data, f.gen), spec, state.config.phi);
  g.set_output(obj.total);

  diff::Bindings b;
  b.bind(x, batch).bind(z, latent);
  gen.bind(b, state.params);
  if (f.on_data) {
    f.on_data->bind(b, *state.encoder);
    f.on_gen->bind(b, *state.encoder);
  }
  const diff::Evaluation ev = evaluate_objective(g, b, state, batch, latent, spec);
  GradientReport out{objective::read_report(ev, obj, spec, state.config.phi), {}};
  const diff::GradientResult gr = diff::backward(g, ev);
  for (diff::NodeId id : gen.params) out.grads.push_back(gr.grad(id));
  return out;
}

PsiReport psi_step(TrainState& state, const Tensor& batch, const Tensor& latent, const kernels::KernelSpec& spec) {
  if (!state.encoder || !state.decoder || !state.psi_optimizer) {
    throw InvalidArgument("psi_step: the feature variant is not enabled");
  }
  const FeatureConfig& fc = state.config.feature;
  diff::Graph g;
  const auto x = g.input("data");
  const auto z = g.input("latent");
  const auto gen = generator::build_mlp(g, z, state.params.spec, "gen", false);
  const FeatureNodes f = build_features(g, x, gen.output, state.encoder, true);
  const auto dec = generator::build_mlp(g, f.data, state.decoder->spec, "dec");
  const auto obj = objective::build_objective(g, density::KdeInputs::shared(f.data, f.gen), spec, state.config.phi);
  const auto diff_node = g.sub(dec.output, x);
  const auto rec = g.mean(g.mul(diff_node, diff_node));
  g.name(rec, "reconstruction");
  const auto loss = g.sub(g.scale(rec, fc.reconstruction_weight), obj.total);
  g.set_output(loss);

  diff::Bindings b;
  b.bind(x, batch).bind(z, latent);
  gen.bind(b, state.params);
  f.on_data->bind(b, *state.encoder);
  f.on_gen->bind(b, *state.encoder);
  dec.bind(b, *state.decoder);
  const diff::Evaluation ev = evaluate_objective(g, b, state, batch, latent, spec);
  PsiReport report{objective::read_report(ev, obj, spec, state.config.phi), ev.value(rec).item()};
  const diff::GradientResult gr = diff::backward(g, ev);

  std::vector<Tensor> params = state.encoder->tensors();
  std::vector<Tensor> grads;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor sum = gr.grad(f.on_data->params[i]);
    const Tensor& other = gr.grad(f.on_gen->params[i]);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += other[j];
    grads.push_back(std::move(sum));
  }
  for (const Tensor& t : state.decoder->tensors()) params.push_back(t);
  for (diff::NodeId id : dec.params) grads.push_back(gr.grad(id));

  state.psi_optimizer->step(params, grads);
  const std::size_t n_enc = state.encoder->tensors().size();
  state.encoder->assign({params.begin(), params.begin() + static_cast<std::ptrdiff_t>(n_enc)});
  state.decoder->assign({params.begin() + static_cast<std::ptrdiff_t>(n_enc), params.end()});
  clip_all(*state.encoder, fc.clip);
  clip_all(*state.decoder, fc.clip);
  return report;
}

namespace {

StepReport theta_update(TrainState& state, const Tensor& data_pool) {
  const std::size_t step = state.iteration + 1;
  const Tensor batch = diff::gather_rows(data_pool, state.batches.next());
  const Tensor z = state.latent.next(state.config.batch_size);
  const kernels::KernelSpec spec = current_kernel(state, feature_dim(state, batch));
  GradientReport gr = generator_gradient(state, batch, z, spec);

  StepReport report{step, spec.min_bandwidth(), gr.objective, global_norm(gr.grads)};
  std::vector<Tensor> params = state.params.tensors();
  state.optimizer.step(params, gr.grads);
  state.params.assign(params);
  if (state.schedule) state.schedule->step();
  state.iteration = step;
  return report;
}

}  // namespace

StepReport train_step(TrainState& state, const Tensor& data_pool) {
  try {
    return theta_update(state, data_pool);
  } catch (const Error&) {
    rethrow_with_context("iteration " + std::to_string(state.iteration + 1));
  }
}

StepReport feature_adversarial_step(TrainState& state, const Tensor& data_pool) {
  if (!state.encoder) throw InvalidArgument("feature_adversarial_step: the feature variant is not enabled");
  const std::string where = "iteration " + std::to_string(state.iteration + 1);
  try {
    for (std::size_t k = 0; k < state.config.feature.psi_steps; ++k) {
      const Tensor batch = diff::gather_rows(data_pool, state.psi_batches->next());
      const Tensor z = state.psi_latent->next(state.config.batch_size);
      psi_step(state, batch, z, current_kernel(state, feature_dim(state, batch)));
    }
  } catch (const Error&) {
    rethrow_with_context(where + ", feature (psi) phase");
  }
  try {
    return theta_update(state, data_pool);
  } catch (const Error&) {
    rethrow_with_context(where + ", generator (theta) phase");
  }
}

void TrainHistory::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "iter,sigma,kn,jsd_f,jsd_s,grad_norm,wall_ms\n";
  char line[512];
  for (const HistoryRecord& r : records) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.3f\n", r.iter, r.sigma, r.kn, r.jsd_f,
                  r.jsd_s, r.grad_norm, r.wall_ms);
    out << line;
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

TrainHistory train(const TrainConfig& config, const Tensor& data, const StepObserver& observer) {
  if (data.rank() != 2 || data.cols() != config.generator.output_dim()) {
    throw ShapeError("train: data must be a matrix with " + std::to_string(config.generator.output_dim()) +
                     " columns");
  }
  TrainState state = make_state(config, data.rows());
  TrainHistory history;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    if (!config.record_wall_time) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  auto record = [&](const StepReport& r) {
    history.records.push_back({r.iter, r.sigma, r.objective.total, r.objective.term1, r.objective.term2, r.grad_norm,
                               elapsed_ms()});
  };
  auto fail = [&](const std::string& msg) {
    history.final_params = state.params;
    history.final_encoder = state.encoder;
    history.final_decoder = state.decoder;
    throw TrainingError(msg, history, std::current_exception());
  };

  try {
    MinibatchSampler eval_batches(data.rows(), config.batch_size, make_rng(config.seed, {kEvalBatch}));
    const Tensor batch = diff::gather_rows(data, eval_batches.next());
    const Tensor z = generator::sample_latent(derived_latent(config, kEvalLatent), config.batch_size, 0);
    const kernels::KernelSpec spec = current_kernel(state, feature_dim(state, batch));
    const GradientReport gr = generator_gradient(state, batch, z, spec);
    record({0, spec.min_bandwidth(), gr.objective, global_norm(gr.grads)});
  } catch (const Error& e) {
    fail(std::string("initial evaluation: ") + e.what());
  }

  for (std::size_t t = 0; t < config.iterations; ++t) {
    StepReport r;
    try {
      r = config.feature.enabled ? feature_adversarial_step(state, data) : train_step(state, data);
    } catch (const Error& e) {
      fail(e.what());
    }
    if (r.iter % config.eval_every == 0 || r.iter == config.iterations) record(r);
    if (observer) observer(state, r);
  }
  history.final_params = state.params;
  history.final_encoder = state.encoder;
  history.final_decoder = state.decoder;
  return history;
}

}  // namespace kgan::training
