#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ownrecon/sampling.hpp"
#include "ownrecon/unroll.hpp"

namespace ownrecon {

using Json = nlohmann::json;

/// Strict reader for one JSON object: every key must be consumed, type
/// errors and unknown keys raise ConfigError naming the full key path.
class StrictObject {
 public:
  StrictObject(const Json& j, std::string path);

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key, const T& fallback) {
    seen_.push_back(key);
    if (!j_.contains(key)) return fallback;
    return as<T>(key);
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    seen_.push_back(key);
    if (!j_.contains(key)) return std::nullopt;
    return as<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    seen_.push_back(key);
    if (!j_.contains(key)) throw ConfigError("missing key '" + child_path(key) + "'");
    return as<T>(key);
  }

  /// Sub-object reader (empty object when the key is absent).
  StrictObject object(const std::string& key);

  /// Throws for keys that were never requested.
  void finish() const;

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  template <typename T>
  T as(const std::string& key) const {
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad value for '" + child_path(key) + "': " + e.what());
    }
  }

  Json j_;
  std::string path_;
  std::vector<std::string> seen_;
};

Json to_json(const SsmConfig& cfg);
SsmConfig ssm_config_from_json(StrictObject obj);

Json to_json(const AblationSwitches& sw);
AblationSwitches switches_from_json(StrictObject obj);

Json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(StrictObject obj);

Json to_json(const MaskSpec& spec);
MaskSpec mask_spec_from_json(StrictObject obj);

}  // namespace ownrecon
