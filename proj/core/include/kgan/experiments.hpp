#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgan/config.hpp"
#include "kgan/datasets.hpp"
#include "kgan/metrics.hpp"
#include "kgan/training.hpp"

namespace kgan::experiments {

using diff::Tensor;

struct Terms {
  double total = 0.0;
  double term1 = 0.0;
  double term2 = 0.0;
};

/// Trial-averaged objective values; empty when some trial underflowed.
struct AnalysisRow {
  double sigma = 0.0;
  std::optional<Terms> ideal;
  std::optional<Terms> mean;
};

/// For each sigma, averages kn_objective (phi = 0) over `trials` draws of
/// (a) two disjoint random n-subsets of the pool as data and generated
/// points and (b) a data subset against n copies of its mean.
std::vector<AnalysisRow> bandwidth_analysis(const Tensor& data_pool, const std::vector<double>& sigma_grid,
                                            std::size_t n, std::size_t trials, std::uint64_t seed);

/// `count` values spaced evenly in log between lo and hi, inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

/// Columns sigma, ideal_total, ideal_t1, ideal_t2, mean_total, mean_t1,
/// mean_t2; underflowed cells hold "underflow".
void write_analysis_csv(const std::vector<AnalysisRow>& rows, const std::filesystem::path& path);

struct SweepRow {
  double sigma = 0.0;
  double ee = 0.0;
  double enn = 0.0;
  std::optional<std::string> error;
};

struct SweepOptions {
  std::size_t eval_samples = 2000;
};

/// Trains one generator per sigma with a constant schedule (all sharing
/// base.train.seed) and scores EE and ENN in original data coordinates. A
/// failed training fills `error` and the sweep moves on.
std::vector<SweepRow> bandwidth_sweep(const config::RunConfig& base, const config::Dataset& data,
                                      const std::vector<double>& sigmas, const metrics::Classifier& clf,
                                      const SweepOptions& options = {});

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// Six-phase ladder 0.8 -> 0.025 on the default ring; 2000 iterations per
/// phase, or 10000 with paper_scale.
config::RunConfig mog_preset(bool paper_scale = false, std::uint64_t seed = 0);

struct MogOptions {
  std::size_t samples = 2000;
  double eval_sigma = 0.05;
  /// Where history.csv, samples.csv, samples.svg, snapshot_*.csv/svg and
  /// coverage.csv go; nothing is written when empty.
  std::filesystem::path output_dir;
};

struct MogResult {
  training::TrainHistory history;
  datasets::DataScaler scaler;
  Tensor samples;                 // final, original coordinates
  std::vector<Tensor> snapshots;  // initial and after each ladder phase
  std::size_t coverage = 0;
  std::size_t initial_coverage = 0;
  objective::ObjectiveReport jsd_trained;
  objective::ObjectiveReport jsd_untrained;
};

/// Trains on preset.data (a MOG source is required) and reports mode
/// coverage and held-out JSD estimates in original coordinates.
MogResult mog_reproduction(const config::RunConfig& preset, const MogOptions& options = {});

}  // namespace kgan::experiments
