#include "run_dir.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include "kgan/checkpoint.hpp"
#include "kgan/version.hpp"

namespace kgan::cli {

namespace {
constexpr int kManifestVersion = 1;
}

std::filesystem::path make_run_dir(const std::string& explicit_dir, const std::string& command, std::uint64_t seed) {
  std::filesystem::path dir;
  if (!explicit_dir.empty()) {
    dir = explicit_dir;
  } else {
    const char* root = std::getenv("KGAN_OUTPUT_ROOT");
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
    dir = std::filesystem::path(root && *root ? root : "runs") /
          (command + "-" + stamp + "-seed" + std::to_string(seed));
  }
  std::filesystem::create_directories(dir);
  return dir;
}

Manifest::Manifest(std::string command, std::uint64_t seed) {
  set("manifest_version", std::to_string(kManifestVersion));
  set("kgan_version", version());
  set("command", std::move(command));
  set("seed", std::to_string(seed));
}

void Manifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Manifest::add_file(const std::string& name, const std::string& schema) { files_.emplace_back(name, schema); }

void Manifest::write(const std::filesystem::path& dir) const {
  std::ostringstream os;
  for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
  os << "\n[files]\n";
  for (const auto& [name, schema] : files_) os << name << " = " << schema << '\n';
  checkpoint::write_atomically(dir / "MANIFEST", os.str());
}

}  // namespace kgan::cli
