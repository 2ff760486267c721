#include <cstdio>
#include <exception>
#include <functional>

#include <CLI11.hpp>

#include "commands.hpp"
#include "kgan/config.hpp"
#include "kgan/error.hpp"
#include "kgan/training.hpp"
#include "kgan/version.hpp"

namespace {

using namespace kgan::cli;

void add_mog_flags(CLI::App* cmd, MogFlags& f) {
  cmd->add_option("--modes", f.modes, "MOG classifier: number of modes")->check(CLI::PositiveNumber);
  cmd->add_option("--radius", f.radius, "MOG classifier: ring radius")->check(CLI::NonNegativeNumber);
  cmd->add_option("--stddev", f.stddev, "MOG classifier: per-mode standard deviation")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel GAN: train and evaluate generators against a closed-form KDE discriminator", "kgan"};
  app.set_version_flag("--version", kgan::version());
  app.require_subcommand(1);

  std::function<int()> run;

  TrainOptions train;
  auto* c_train = app.add_subcommand("train", "Train a generator from a JSON config");
  c_train->add_option("-c,--config", train.config, "Config file")->required();
  c_train->add_option("--seed", train.seed, "Override the config seed");
  c_train->add_option("--iterations", train.iterations, "Override the iteration budget");
  c_train->add_option("--run-dir", train.run_dir, "Output directory (default: $KGAN_OUTPUT_ROOT or ./runs)");
  c_train->add_option("--samples", train.samples, "Generated samples written to samples.csv")
      ->check(CLI::PositiveNumber);
  c_train->callback([&] { run = [&] { return cmd_train(train); }; });

  EvalOptions eval;
  auto* c_eval = app.add_subcommand("eval", "Score a checkpoint against a data CSV");
  c_eval->add_option("--checkpoint", eval.checkpoint, "checkpoint.json from a run")->required();
  c_eval->add_option("--data", eval.data, "Reference data CSV (original coordinates)")->required();
  c_eval->add_flag("--header", eval.header, "The data CSV has a header row");
  c_eval->add_option("--metrics", eval.metrics, "Comma list from ee, enn, ls, jsd, mmd")->capture_default_str();
  c_eval->add_option("--sigma", eval.sigma, "Kernel bandwidth for jsd and mmd")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_eval->add_option("--phi", eval.phi, "Objective regularizer for jsd")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  c_eval->add_option("--samples", eval.samples, "Generated samples")->check(CLI::PositiveNumber)->capture_default_str();
  c_eval->add_option("--seed", eval.seed, "Seed for the latent draw")->capture_default_str();
  c_eval->add_option("--out", eval.out, "Metrics CSV path (default: metrics.csv next to the checkpoint)");
  add_mog_flags(c_eval, eval.mog);
  c_eval->callback([&] { run = [&] { return cmd_eval(eval); }; });

  SweepOptions sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Train one generator per constant bandwidth and report EE/ENN");
  c_sweep->add_option("-c,--config", sweep.config, "Base config file")->required();
  c_sweep->add_option("--sigmas", sweep.sigmas, "Bandwidths")->delimiter(',')->check(CLI::PositiveNumber);
  c_sweep->add_option("--seed", sweep.seed, "Override the config seed");
  c_sweep->add_option("--iterations", sweep.iterations, "Override the iteration budget");
  c_sweep->add_option("--samples", sweep.samples, "Generated samples per score")->check(CLI::PositiveNumber);
  c_sweep->add_option("--run-dir", sweep.run_dir, "Output directory");
  c_sweep->callback([&] { run = [&] { return cmd_sweep(sweep); }; });

  AnalysisOptions analysis;
  auto* c_analysis = app.add_subcommand("bandwidth-analysis", "Ideal vs mean generator objective across bandwidths");
  c_analysis->add_option("--data", analysis.data, "Pool CSV (default: MOG samples)");
  c_analysis->add_flag("--header", analysis.header, "The pool CSV has a header row");
  c_analysis->add_option("--pool", analysis.pool, "MOG pool size")->check(CLI::PositiveNumber)->capture_default_str();
  c_analysis->add_option("--sigma-min", analysis.sigma_min, "Smallest bandwidth")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_analysis->add_option("--sigma-max", analysis.sigma_max, "Largest bandwidth")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_analysis->add_option("--points", analysis.points, "Grid points, log spaced")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_analysis->add_option("-n", analysis.n, "Subset size")->check(CLI::PositiveNumber)->capture_default_str();
  c_analysis->add_option("--trials", analysis.trials, "Random subsets per bandwidth")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_analysis->add_option("--seed", analysis.seed, "Seed")->capture_default_str();
  c_analysis->add_option("--run-dir", analysis.run_dir, "Output directory");
  add_mog_flags(c_analysis, analysis.mog);
  c_analysis->callback([&] { run = [&] { return cmd_bandwidth_analysis(analysis); }; });

  CarpetOptions carpet;
  auto* c_carpet = app.add_subcommand("carpet", "Classifier entropy over a latent convex-combination mesh");
  c_carpet->add_option("--checkpoint", carpet.checkpoint, "checkpoint.json from a run")->required();
  auto* seeds = c_carpet->add_option("--corner-seeds", carpet.corner_seeds, "Four latent seeds")
                    ->delimiter(',')
                    ->expected(4);
  auto* corners = c_carpet->add_option("--corners", carpet.corners, "CSV with four latent rows");
  seeds->excludes(corners);
  c_carpet->add_option("-R,--resolution", carpet.resolution, "Mesh resolution")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}))
      ->capture_default_str();
  c_carpet->add_option("--out", carpet.out, "Output path stem (writes .csv and .svg)");
  add_mog_flags(c_carpet, carpet.mog);
  c_carpet->callback([&] { run = [&] { return cmd_carpet(carpet); }; });

  MogOptions mog;
  auto* c_mog = app.add_subcommand("mog", "Ring-of-Gaussians run with the six-phase bandwidth ladder");
  c_mog->add_flag("--paper-scale", mog.paper_scale, "10000 iterations per phase instead of 2000");
  c_mog->add_option("--seed", mog.seed, "Seed")->capture_default_str();
  c_mog->add_option("--phase-iterations", mog.phase_iterations, "Override iterations per phase");
  c_mog->add_option("--samples", mog.samples, "Generated samples for coverage and JSD")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_mog->add_option("--run-dir", mog.run_dir, "Output directory");
  c_mog->callback([&] { run = [&] { return cmd_mog(mog); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return run();
  } catch (const kgan::config::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
