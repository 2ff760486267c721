#include "kgan/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "kgan/error.hpp"
#include "kgan/objective.hpp"
#include "kgan/random.hpp"
#include "kgan/svg.hpp"

namespace kgan::experiments {

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi >= lo)) throw InvalidArgument("log_grid: need 0 < lo <= hi");
  if (count == 0) throw InvalidArgument("log_grid: count must be >= 1");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<AnalysisRow> bandwidth_analysis(const Tensor& data_pool, const std::vector<double>& sigma_grid,
                                            std::size_t n, std::size_t trials, std::uint64_t seed) {
  if (data_pool.rank() != 2) throw ShapeError("bandwidth_analysis: pool must be a matrix");
  if (n < 1 || data_pool.rows() < 2 * n) {
    throw InvalidArgument("bandwidth_analysis: pool of " + std::to_string(data_pool.rows()) +
                          " points is too small for two disjoint subsets of " + std::to_string(n));
  }
  if (trials < 1) throw InvalidArgument("bandwidth_analysis: trials must be >= 1");
  for (double s : sigma_grid) {
    if (!(s > 0.0)) throw InvalidArgument("bandwidth_analysis: sigma values must be > 0");
  }
  const std::size_t k = data_pool.cols();
  std::vector<AnalysisRow> rows;
  for (std::size_t r = 0; r < sigma_grid.size(); ++r) {
    const kernels::KernelSpec spec{{sigma_grid[r]}, false, k};
    Terms ideal, mean;
    bool ideal_ok = true, mean_ok = true;
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng = make_rng(seed, {r, t});
      std::vector<std::size_t> order(data_pool.rows());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      const std::span<const std::size_t> all(order);
      const Tensor data = diff::gather_rows(data_pool, all.subspan(0, n));
      const Tensor other = diff::gather_rows(data_pool, all.subspan(n, n));

      Tensor centroid = Tensor::matrix(n, k);
      std::vector<double> mu(k, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < k; ++c) mu[c] += data.at(i, c);
      }
      for (double& v : mu) v /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < k; ++c) centroid.at(i, c) = mu[c];
      }

      auto accumulate = [&](const Tensor& gen, Terms& acc, bool& ok) {
        if (!ok) return;
        try {
          const auto rep = objective::kn_objective(data, gen, spec, 0.0);
          acc.total += rep.total;
          acc.term1 += rep.term1;
          acc.term2 += rep.term2;
        } catch (const UnderflowError&) {
          ok = false;
        }
      };
      accumulate(other, ideal, ideal_ok);
      accumulate(centroid, mean, mean_ok);
    }
    const auto avg = [&](Terms t) {
      const auto m = static_cast<double>(trials);
      return Terms{t.total / m, t.term1 / m, t.term2 / m};
    };
    AnalysisRow row{sigma_grid[r], std::nullopt, std::nullopt};
    if (ideal_ok) row.ideal = avg(ideal);
    if (mean_ok) row.mean = avg(mean);
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_analysis_csv(const std::vector<AnalysisRow>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "sigma,ideal_total,ideal_t1,ideal_t2,mean_total,mean_t1,mean_t2\n";
  auto terms = [&](const std::optional<Terms>& t) {
    if (!t) return std::string("underflow,underflow,underflow");
    return cell(t->total) + "," + cell(t->term1) + "," + cell(t->term2);
  };
  for (const AnalysisRow& r : rows) out << cell(r.sigma) << ',' << terms(r.ideal) << ',' << terms(r.mean) << '\n';
  if (!out) throw FormatError("write failed for " + path.string());
}

namespace {

constexpr std::uint64_t kEvalLatentStream = 0xe7a1;

Tensor draw_samples(const generator::MlpParams& params, const config::RunConfig& cfg,
                    const datasets::DataScaler& scaler, std::size_t count) {
  generator::LatentSpec latent = cfg.train.latent;
  latent.seed = stream_seed(cfg.train.seed, {kEvalLatentStream});
  return scaler.inverse(generator::generate(params, generator::sample_latent(latent, count, 0)));
}

}  // namespace

std::vector<SweepRow> bandwidth_sweep(const config::RunConfig& base, const config::Dataset& data,
                                      const std::vector<double>& sigmas, const metrics::Classifier& clf,
                                      const SweepOptions& options) {
  if (sigmas.empty()) throw InvalidArgument("bandwidth_sweep: empty sigma list");
  for (double s : sigmas) {
    if (!(s > 0.0)) throw InvalidArgument("bandwidth_sweep: sigma values must be > 0");
  }
  const Tensor train_scaled = data.scaler.forward(data.train);
  std::vector<SweepRow> rows;
  for (double sigma : sigmas) {
    config::RunConfig cfg = base;
    cfg.train.schedule = kernels::BandwidthSchedule::constant(sigma);
    SweepRow row{sigma, 0.0, 0.0, std::nullopt};
    try {
      const training::TrainHistory h = training::train(cfg.train, train_scaled);
      const Tensor samples = draw_samples(h.final_params, cfg, data.scaler, options.eval_samples);
      row.ee = metrics::expected_entropy(samples, clf);
      row.enn = metrics::enn(samples, data.train);
    } catch (const Error& e) {
      row.ee = row.enn = std::nan("");
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "sigma,ee,enn,error\n";
  for (const SweepRow& r : rows) {
    std::string err = r.error.value_or("");
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << cell(r.sigma) << ',' << cell(r.ee) << ',' << cell(r.enn) << ',' << err << '\n';
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

config::RunConfig mog_preset(bool paper_scale, std::uint64_t seed) {
  using generator::Activation;
  config::RunConfig cfg;
  training::TrainConfig& t = cfg.train;
  t.seed = seed;
  t.generator = {{100, 128, 128, 128, 2}, {Activation::Relu, Activation::Relu, Activation::Tanh, Activation::Tanh}};
  t.latent = {100, generator::LatentFamily::StandardNormal, 0.0, 1.0, 0};
  t.kernel = {{0.8}, false, 2};
  const std::size_t per_phase = paper_scale ? 10000 : 2000;
  std::vector<kernels::BandwidthSchedule::Phase> phases;
  for (double s : {0.8, 0.4, 0.2, 0.1, 0.05, 0.025}) phases.push_back({s, per_phase});
  t.schedule = kernels::BandwidthSchedule::ladder(phases);
  t.phi = 0.0;
  t.batch_size = 256;
  t.optimizer = training::RmspropConfig{0.001, 0.9, 1e-8};
  t.iterations = t.schedule->total_iterations();
  t.eval_every = 100;
  t.record_wall_time = false;

  cfg.data.source = config::DataConfig::Source::Mog;
  cfg.data.mog = datasets::MogSpec{};
  cfg.data.samples = 20000;
  cfg.data.scale = true;
  cfg.data.train_fraction = 0.9;
  return cfg;
}

MogResult mog_reproduction(const config::RunConfig& preset, const MogOptions& options) {
  if (preset.data.source != config::DataConfig::Source::Mog) {
    throw InvalidArgument("mog_reproduction: the preset must draw MOG data");
  }
  if (preset.train.generator.output_dim() != 2) throw InvalidArgument("mog_reproduction: generator must emit 2-D points");
  const config::Dataset data = config::materialize(preset.data, preset.train.seed);
  const Tensor train_scaled = data.scaler.forward(data.train);

  // phase boundaries where snapshots are taken
  std::vector<std::size_t> boundaries;
  if (preset.train.schedule && preset.train.schedule->kind() == kernels::BandwidthSchedule::Kind::Ladder) {
    std::size_t end = 0;
    for (const auto& p : preset.train.schedule->phases()) boundaries.push_back(end += p.iterations);
  } else {
    boundaries.push_back(preset.train.iterations);
  }

  MogResult result;
  result.scaler = data.scaler;
  const training::TrainState initial = training::make_state(preset.train, train_scaled.rows());
  result.snapshots.push_back(draw_samples(initial.params, preset, data.scaler, options.samples));
  std::size_t next_boundary = 0;
  const auto observer = [&](const training::TrainState& state, const training::StepReport&) {
    while (next_boundary < boundaries.size() && state.iteration == boundaries[next_boundary]) {
      result.snapshots.push_back(draw_samples(state.params, preset, data.scaler, options.samples));
      ++next_boundary;
    }
  };
  result.history = training::train(preset.train, train_scaled, observer);
  // phases the iteration budget never reached still get a snapshot
  while (result.snapshots.size() < boundaries.size() + 1) {
    result.snapshots.push_back(draw_samples(result.history.final_params, preset, data.scaler, options.samples));
  }

  result.samples = draw_samples(result.history.final_params, preset, data.scaler, options.samples);
  result.coverage = metrics::mode_coverage(result.samples, preset.data.mog);
  result.initial_coverage = metrics::mode_coverage(result.snapshots.front(), preset.data.mog);

  const std::size_t m = std::min(options.samples, data.held_out.rows());
  std::vector<std::size_t> head(m);
  std::iota(head.begin(), head.end(), std::size_t{0});
  const Tensor held = diff::gather_rows(data.held_out, head);
  const kernels::KernelSpec eval_spec{{options.eval_sigma}, false, 2};
  result.jsd_trained = metrics::jsd_estimate(held, diff::gather_rows(result.samples, head), eval_spec, 0.0);
  result.jsd_untrained = metrics::jsd_estimate(held, diff::gather_rows(result.snapshots.front(), head), eval_spec, 0.0);

  if (!options.output_dir.empty()) {
    const auto& dir = options.output_dir;
    std::filesystem::create_directories(dir);
    result.history.write_csv(dir / "history.csv");
    datasets::save_csv(result.samples, dir / "samples.csv", {"x", "y"});
    const Tensor modes = preset.data.mog.means();
    const double extent = 1.25 * (preset.data.mog.radius + 4.0 * preset.data.mog.stddev);
    const svg::Bounds bounds{-extent, extent, -extent, extent};
    auto plot = [&](const Tensor& samples, const std::string& title) {
      return svg::scatter({{held, "#bbbbbb", "held-out data", 1.0}, {samples, "#d62728", "generated", 1.5},
                           {modes, "#000000", "mode means", 3.0}},
                          title, bounds);
    };
    svg::write(plot(result.samples, "final samples"), (dir / "samples.svg").string());
    for (std::size_t i = 0; i < result.snapshots.size(); ++i) {
      const std::string stem = "snapshot_" + std::to_string(i);
      datasets::save_csv(result.snapshots[i], dir / (stem + ".csv"), {"x", "y"});
      const std::string title = i == 0 ? "initial" : "after phase " + std::to_string(i);
      svg::write(plot(result.snapshots[i], title), (dir / (stem + ".svg")).string());
    }
    auto out = open_csv(dir / "coverage.csv");
    out << "metric,value\n";
    out << "modes," << preset.data.mog.modes << '\n';
    out << "coverage," << result.coverage << '\n';
    out << "initial_coverage," << result.initial_coverage << '\n';
    out << "jsd_trained," << cell(result.jsd_trained.total) << '\n';
    out << "jsd_trained_f," << cell(result.jsd_trained.term1) << '\n';
    out << "jsd_trained_s," << cell(result.jsd_trained.term2) << '\n';
    out << "jsd_untrained," << cell(result.jsd_untrained.total) << '\n';
    out << "eval_sigma," << cell(options.eval_sigma) << '\n';
  }
  return result;
}

}  // namespace kgan::experiments
