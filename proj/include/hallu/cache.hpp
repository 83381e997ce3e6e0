#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

namespace hallu {

/// Content-addressed store shared by the LLM gateway and the knowledge
/// service. With a directory, each entry is `<dir>/<key>.json` holding
/// {"key", "op", "value"}; without one it lives in memory only.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::filesystem::path dir);

  /// SHA-256 over the operation name and the canonical (sorted-key) JSON of
  /// its inputs.
  static std::string make_key(std::string_view op, const nlohmann::json& inputs);

  std::optional<nlohmann::json> get(const std::string& key) const;

  /// Stores `value` unless the key already has one; returns the stored value.
  nlohmann::json put_if_absent(const std::string& key, std::string_view op, nlohmann::json value);

  const std::optional<std::filesystem::path>& dir() const { return dir_; }

 private:
  std::filesystem::path file_for(const std::string& key) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, nlohmann::json> memory_;
};

}  // namespace hallu
