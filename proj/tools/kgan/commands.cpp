#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "kgan/checkpoint.hpp"
#include "kgan/config.hpp"
#include "kgan/datasets.hpp"
#include "kgan/experiments.hpp"
#include "kgan/metrics.hpp"
#include "kgan/random.hpp"
#include "kgan/svg.hpp"
#include "kgan/training.hpp"
#include "run_dir.hpp"

namespace kgan::cli {

using diff::Tensor;

namespace {

constexpr const char* kHistorySchema = "csv v1: iter,sigma,kn,jsd_f,jsd_s,grad_norm,wall_ms";
constexpr const char* kSamplesSchema = "csv v1: one generated point per row, original coordinates";
constexpr std::uint64_t kSampleStream = 0x5a3d;

datasets::MogSpec mog_spec(const MogFlags& f) {
  datasets::MogSpec spec;
  spec.modes = f.modes;
  spec.radius = f.radius;
  spec.stddev = f.stddev;
  return spec;
}

Tensor head_rows(const Tensor& m, std::size_t count) {
  std::vector<std::size_t> idx(std::min(count, m.rows()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return diff::gather_rows(m, idx);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void scatter_plot(const Tensor& samples, const Tensor* data, const std::filesystem::path& path,
                  const std::string& title) {
  std::vector<svg::Series> series;
  if (data) series.push_back({head_rows(*data, 2000), "#bbbbbb", "data", 1.0});
  series.push_back({samples, "#d62728", "generated", 1.5});
  svg::write(svg::scatter(series, title), path.string());
}

void print_report(const char* label, const objective::ObjectiveReport& r) {
  std::printf("%s K_n = %.6f  JSD-F = %.6f  JSD-S = %.6f  (-log 4 = %.6f)\n", label, r.total, r.term1, r.term2,
              -std::log(4.0));
}

}  // namespace

int cmd_train(const TrainOptions& o) {
  config::RunConfig cfg = config::load_config(o.config);
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.iterations) cfg.train.iterations = *o.iterations;

  const config::Dataset data = config::materialize(cfg.data, cfg.train.seed);
  const auto dir = make_run_dir(o.run_dir, "train", cfg.train.seed);
  checkpoint::write_atomically(dir / "config.json", config::to_json(cfg));
  Manifest manifest("train", cfg.train.seed);
  manifest.add_file("config.json", "json: resolved training config");

  training::TrainHistory history;
  try {
    history = training::train(cfg.train, data.scaler.forward(data.train));
  } catch (const training::TrainingError& e) {
    e.partial().write_csv(dir / "history.csv");
    manifest.add_file("history.csv", kHistorySchema);
    manifest.set("status", "failed");
    manifest.write(dir);
    throw;
  }
  history.write_csv(dir / "history.csv");
  manifest.add_file("history.csv", kHistorySchema);

  checkpoint::Checkpoint ckpt{history.final_params, cfg.train.latent, data.scaler, history.final_encoder,
                              history.final_decoder,  cfg.train.seed,  cfg.train.iterations};
  checkpoint::save(ckpt, dir / "checkpoint.json");
  manifest.add_file("checkpoint.json", "json: kgan-checkpoint v" + std::to_string(checkpoint::kFormatVersion));

  const Tensor samples = ckpt.sample(o.samples, stream_seed(cfg.train.seed, {kSampleStream}));
  datasets::save_csv(samples, dir / "samples.csv");
  manifest.add_file("samples.csv", kSamplesSchema);
  if (samples.cols() == 2) {
    scatter_plot(samples, &data.train, dir / "samples.svg", "generated samples");
    manifest.add_file("samples.svg", "svg scatter of samples.csv over training data");
  }
  manifest.set("status", "complete");
  manifest.write(dir);

  const training::HistoryRecord& last = history.records.back();
  std::printf("run directory: %s\n", dir.string().c_str());
  std::printf("final (iteration %zu, sigma %.6g): K_n = %.6f  JSD-F = %.6f  JSD-S = %.6f\n", last.iter, last.sigma,
              last.kn, last.jsd_f, last.jsd_s);
  if (cfg.data.source == config::DataConfig::Source::Mog && samples.cols() == 2) {
    std::printf("mode coverage: %zu of %zu\n", metrics::mode_coverage(samples, cfg.data.mog), cfg.data.mog.modes);
  }
  return 0;
}

int cmd_eval(const EvalOptions& o) {
  const auto selected = split_list(o.metrics);
  for (const auto& m : selected) {
    if (m != "ee" && m != "enn" && m != "ls" && m != "jsd" && m != "mmd") {
      throw UsageError("--metrics: unknown metric '" + m + "' (ee, enn, ls, jsd, mmd)");
    }
  }
  const checkpoint::Checkpoint ckpt = checkpoint::load(o.checkpoint);
  const Tensor data = datasets::load_csv(o.data, o.header);
  if (data.cols() != ckpt.generator.spec.output_dim()) {
    throw UsageError("--data: " + std::to_string(data.cols()) + " columns but the generator emits " +
                     std::to_string(ckpt.generator.spec.output_dim()));
  }
  const Tensor samples = ckpt.sample(o.samples, stream_seed(o.seed, {kSampleStream}));
  const kernels::KernelSpec spec{{o.sigma}, false, data.cols()};
  const datasets::MogSpec mog = mog_spec(o.mog);

  std::vector<metrics::MetricRow> rows;
  for (const auto& m : selected) {
    if (m == "ee" || m == "ls") {
      if (samples.cols() != 2) throw UsageError("--metrics " + m + " needs 2-D data for the MOG classifier");
      const auto clf = metrics::Classifier::mog_posterior(mog);
      if (m == "ee") {
        rows.push_back({"ee", metrics::expected_entropy(samples, clf), samples.rows(), o.seed});
      } else {
        rows.push_back({"ls", metrics::classifier_score(samples, clf, mog.mixture_weights()), samples.rows(), o.seed});
      }
    } else if (m == "enn") {
      rows.push_back({"enn", metrics::enn(samples, data), samples.rows(), o.seed});
    } else if (m == "jsd") {
      const std::size_t n = std::min(samples.rows(), data.rows());
      const auto r = metrics::jsd_estimate(head_rows(data, n), head_rows(samples, n), spec, o.phi);
      rows.push_back({"jsd", r.total, n, o.seed});
      rows.push_back({"jsd_f", r.term1, n, o.seed});
      rows.push_back({"jsd_s", r.term2, n, o.seed});
      rows.push_back({"jsd_sigma", o.sigma, n, o.seed});
    } else if (m == "mmd") {
      rows.push_back({"mmd", metrics::mmd(data, samples, spec), samples.rows(), o.seed});
    }
  }
  for (const auto& r : rows) std::printf("%-10s %.8g\n", r.name.c_str(), r.value);
  std::filesystem::path out = o.out.empty() ? std::filesystem::path(o.checkpoint).parent_path() / "metrics.csv"
                                            : std::filesystem::path(o.out);
  metrics::write_metrics_csv(rows, out);
  std::printf("metrics written to %s\n", out.string().c_str());
  return 0;
}

int cmd_sweep(const SweepOptions& o) {
  config::RunConfig cfg = config::load_config(o.config);
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.iterations) cfg.train.iterations = *o.iterations;
  if (cfg.data.source != config::DataConfig::Source::Mog) {
    throw config::ConfigError("data.source", "the sweep scores EE with the MOG classifier and needs MOG data");
  }
  const config::Dataset data = config::materialize(cfg.data, cfg.train.seed);
  const auto clf = metrics::Classifier::mog_posterior(cfg.data.mog);
  const auto rows = experiments::bandwidth_sweep(cfg, data, o.sigmas, clf, {o.samples});

  const auto dir = make_run_dir(o.run_dir, "sweep", cfg.train.seed);
  checkpoint::write_atomically(dir / "config.json", config::to_json(cfg));
  experiments::write_sweep_csv(rows, dir / "sweep.csv");
  Manifest manifest("sweep", cfg.train.seed);
  manifest.add_file("config.json", "json: base training config");
  manifest.add_file("sweep.csv", "csv v1: sigma,ee,enn,error");
  manifest.write(dir);

  std::printf("%-10s %-12s %-12s\n", "sigma", "EE", "ENN");
  for (const auto& r : rows) {
    if (r.error) {
      std::printf("%-10.4g failed: %s\n", r.sigma, r.error->c_str());
    } else {
      std::printf("%-10.4g %-12.6f %-12.6f\n", r.sigma, r.ee, r.enn);
    }
  }
  std::printf("run directory: %s\n", dir.string().c_str());
  return 0;
}

int cmd_bandwidth_analysis(const AnalysisOptions& o) {
  if (o.sigma_max < o.sigma_min) throw UsageError("--sigma-max must be >= --sigma-min");
  Tensor pool;
  if (!o.data.empty()) {
    pool = datasets::load_csv(o.data, o.header);
  } else {
    datasets::MogSpec spec = mog_spec(o.mog);
    spec.seed = stream_seed(o.seed, {0xda7a});
    pool = datasets::mog_sample(spec, o.pool).points;
  }
  const auto grid = experiments::log_grid(o.sigma_min, o.sigma_max, o.points);
  const auto rows = experiments::bandwidth_analysis(pool, grid, o.n, o.trials, o.seed);

  const auto dir = make_run_dir(o.run_dir, "bandwidth-analysis", o.seed);
  experiments::write_analysis_csv(rows, dir / "bandwidth_analysis.csv");
  Manifest manifest("bandwidth-analysis", o.seed);
  manifest.set("n", std::to_string(o.n));
  manifest.set("trials", std::to_string(o.trials));
  manifest.add_file("bandwidth_analysis.csv",
                    "csv v1: sigma,ideal_total,ideal_t1,ideal_t2,mean_total,mean_t1,mean_t2 (underflow marker)");
  manifest.write(dir);

  std::printf("%-10s %-12s %-12s %s\n", "sigma", "ideal", "mean", "better");
  for (const auto& r : rows) {
    if (!r.ideal || !r.mean) {
      std::printf("%-10.4g %s\n", r.sigma, "underflow");
      continue;
    }
    std::printf("%-10.4g %-12.6f %-12.6f %s\n", r.sigma, r.ideal->total, r.mean->total,
                r.ideal->total < r.mean->total ? "ideal" : "mean");
  }
  std::printf("run directory: %s\n", dir.string().c_str());
  return 0;
}

int cmd_carpet(const CarpetOptions& o) {
  if (o.corner_seeds.empty() == o.corners.empty()) {
    throw UsageError("give exactly one of --corner-seeds or --corners");
  }
  const checkpoint::Checkpoint ckpt = checkpoint::load(o.checkpoint);
  std::vector<std::vector<double>> corners;
  if (!o.corners.empty()) {
    const Tensor z = datasets::load_csv(o.corners);
    if (z.rows() != 4) throw UsageError("--corners: expected 4 rows, found " + std::to_string(z.rows()));
    for (std::size_t i = 0; i < 4; ++i) corners.emplace_back(z.row(i).begin(), z.row(i).end());
  } else {
    if (o.corner_seeds.size() != 4) throw UsageError("--corner-seeds: expected 4 seeds");
    for (std::uint64_t s : o.corner_seeds) {
      generator::LatentSpec latent = ckpt.latent;
      latent.seed = s;
      const Tensor z = generator::sample_latent(latent, 1, 0);
      corners.emplace_back(z.data().begin(), z.data().end());
    }
  }
  const datasets::MogSpec mog = mog_spec(o.mog);
  const auto clf = metrics::Classifier::mog_posterior(mog);
  const auto grid = metrics::entropy_carpet(ckpt.generator, corners, o.resolution, clf,
                                            [&](const Tensor& t) { return ckpt.scaler.inverse(t); });

  const std::filesystem::path base =
      o.out.empty() ? std::filesystem::path(o.checkpoint).parent_path() / "carpet" : std::filesystem::path(o.out);
  std::filesystem::path csv = base, svg_path = base;
  csv += ".csv";
  svg_path += ".svg";
  metrics::write_carpet_csv(grid, csv);
  svg::write(svg::heatmap(grid.entropy, "classifier entropy", 0.0, std::log(static_cast<double>(mog.modes))),
             svg_path.string());
  std::printf("carpet %zux%zu written to %s and %s\n", o.resolution, o.resolution, csv.string().c_str(),
              svg_path.string().c_str());
  return 0;
}

int cmd_mog(const MogOptions& o) {
  config::RunConfig preset = experiments::mog_preset(o.paper_scale, o.seed);
  if (o.phase_iterations) {
    std::vector<kernels::BandwidthSchedule::Phase> phases = preset.train.schedule->phases();
    for (auto& p : phases) p.iterations = *o.phase_iterations;
    preset.train.schedule = kernels::BandwidthSchedule::ladder(phases);
    preset.train.iterations = preset.train.schedule->total_iterations();
  }
  const auto dir = make_run_dir(o.run_dir, "mog", o.seed);
  checkpoint::write_atomically(dir / "config.json", config::to_json(preset));
  const auto result = experiments::mog_reproduction(preset, {o.samples, 0.05, dir});

  checkpoint::Checkpoint ckpt{result.history.final_params, preset.train.latent, result.scaler, std::nullopt,
                              std::nullopt, preset.train.seed, preset.train.iterations};
  checkpoint::save(ckpt, dir / "checkpoint.json");
  Manifest manifest("mog", o.seed);
  manifest.set("paper_scale", o.paper_scale ? "true" : "false");
  manifest.add_file("config.json", "json: resolved training config");
  manifest.add_file("history.csv", kHistorySchema);
  manifest.add_file("samples.csv", "csv v1: x,y generated points, original coordinates");
  manifest.add_file("samples.svg", "svg scatter of samples.csv over held-out data");
  manifest.add_file("snapshot_<k>.csv", "csv v1: x,y samples after ladder phase k (0 = initial)");
  manifest.add_file("snapshot_<k>.svg", "svg scatter of snapshot_<k>.csv");
  manifest.add_file("coverage.csv", "csv v1: metric,value");
  manifest.add_file("checkpoint.json", "json: kgan-checkpoint v" + std::to_string(checkpoint::kFormatVersion));
  manifest.write(dir);

  std::printf("mode coverage: %zu of %zu (initial %zu)\n", result.coverage, preset.data.mog.modes,
              result.initial_coverage);
  print_report("trained  ", result.jsd_trained);
  print_report("untrained", result.jsd_untrained);
  std::printf("run directory: %s\n", dir.string().c_str());
  return 0;
}

}  // namespace kgan::cli
