#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "kgan/datasets.hpp"
#include "kgan/error.hpp"
#include "kgan/training.hpp"

namespace kgan::config {

/// A config field is missing, unknown, mistyped or out of range.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidArgument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct DataConfig {
  enum class Source { Mog, Csv };
  Source source = Source::Mog;
  datasets::MogSpec mog;
  /// Points drawn from the MOG before the held-out split.
  std::size_t samples = 20000;
  std::filesystem::path csv;
  bool header = false;
  /// Map the data into the unit box before training.
  bool scale = true;
  double train_fraction = 0.9;
};

struct RunConfig {
  training::TrainConfig train;
  DataConfig data;
};

/// `origin` names the source in error messages.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);
/// Canonical JSON; parse_config(to_json(c)) reproduces c.
std::string to_json(const RunConfig& config);

struct Dataset {
  datasets::Tensor train;
  datasets::Tensor held_out;
  /// Maps original coordinates to training coordinates.
  datasets::DataScaler scaler;
};

/// Draws or loads the data, splits off the held-out part and fits the scaler
/// on the training part. Randomness derives from `seed`.
Dataset materialize(const DataConfig& data, std::uint64_t seed);

}  // namespace kgan::config
