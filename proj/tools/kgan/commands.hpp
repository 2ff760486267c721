#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgan::cli {

/// Bad flag combination or value; exits with status 1 like a config error.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MogFlags {
  std::size_t modes = 8;
  double radius = 2.0;
  double stddev = 0.05;
};

struct TrainOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::string run_dir;
  std::size_t samples = 2000;
};

struct EvalOptions {
  std::string checkpoint;
  std::string data;
  bool header = false;
  std::string metrics = "ee,enn,ls,jsd,mmd";
  double sigma = 0.05;
  double phi = 0.0;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  std::string out;
  MogFlags mog;
};

struct SweepOptions {
  std::string config;
  std::vector<double> sigmas{0.8, 0.2, 0.05};
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::size_t samples = 2000;
  std::string run_dir;
};

struct AnalysisOptions {
  std::string data;
  bool header = false;
  std::size_t pool = 2000;
  double sigma_min = 0.01;
  double sigma_max = 100.0;
  std::size_t points = 41;
  std::size_t n = 100;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::string run_dir;
  MogFlags mog;
};

struct CarpetOptions {
  std::string checkpoint;
  std::vector<std::uint64_t> corner_seeds;
  std::string corners;
  std::size_t resolution = 20;
  std::string out;
  MogFlags mog;
};

struct MogOptions {
  bool paper_scale = false;
  std::uint64_t seed = 0;
  std::optional<std::size_t> phase_iterations;
  std::size_t samples = 2000;
  std::string run_dir;
};

int cmd_train(const TrainOptions& o);
int cmd_eval(const EvalOptions& o);
int cmd_sweep(const SweepOptions& o);
int cmd_bandwidth_analysis(const AnalysisOptions& o);
int cmd_carpet(const CarpetOptions& o);
int cmd_mog(const MogOptions& o);

}  // namespace kgan::cli
