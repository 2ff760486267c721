#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

#include "kgan/datasets.hpp"
#include "kgan/generator.hpp"

namespace kgan::checkpoint {

inline constexpr int kFormatVersion = 1;

/// Everything needed to sample from a trained generator in data coordinates.
struct Checkpoint {
  generator::MlpParams generator;
  generator::LatentSpec latent;
  datasets::DataScaler scaler;
  std::optional<generator::MlpParams> encoder;
  std::optional<generator::MlpParams> decoder;
  std::uint64_t seed = 0;
  std::size_t iteration = 0;

  /// n generator samples mapped back through the scaler; the latent draw is
  /// fixed by (seed, counter).
  diff::Tensor sample(std::size_t n, std::uint64_t seed, std::uint64_t counter = 0) const;
};

/// Written to a temporary sibling and renamed into place.
void save(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load(const std::filesystem::path& path);

/// Replaces `path` atomically with `contents`.
void write_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace kgan::checkpoint
