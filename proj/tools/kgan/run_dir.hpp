#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace kgan::cli {

/// Directory named <UTC timestamp>-seed<seed> under the output root, which
/// is $KGAN_OUTPUT_ROOT or ./runs. An explicit path wins over both.
std::filesystem::path make_run_dir(const std::string& explicit_dir, const std::string& command, std::uint64_t seed);

/// Versioned description of the files in a run directory.
class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed);
  void set(const std::string& key, const std::string& value);
  /// `schema` lists CSV columns or names the format.
  void add_file(const std::string& name, const std::string& schema);
  void write(const std::filesystem::path& dir) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace kgan::cli
