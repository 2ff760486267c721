#pragma once

// Strict reader over a JSON object: every key must be consumed, so typos in
// config files surface as errors naming the offending field.

#include <set>
#include <string>

#include <json.hpp>

#include "kgan/config.hpp"

namespace kgan::detail {

using json = nlohmann::json;

class Fields {
 public:
  Fields(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw config::ConfigError(where(), "expected an object");
  }

  bool has(const std::string& key) const { return object_.contains(key); }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!object_.contains(key)) throw config::ConfigError(where(key), "missing required field");
    return object_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const json& v = raw(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw config::ConfigError(where(key), "has the wrong type (found " + std::string(v.type_name()) + ")");
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) {
      seen_.insert(key);
      return fallback;
    }
    return get<T>(key);
  }

  Fields object(const std::string& key) { return Fields(raw(key), where(key)); }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& item : object_.items()) {
      if (!seen_.contains(item.key())) throw config::ConfigError(where(item.key()), "unknown key");
    }
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace kgan::detail
