#include "hallu/cache.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "hallu/error.hpp"
#include "hallu/hashing.hpp"

namespace hallu {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(*dir_, ec);
  if (ec) throw ConfigError("cannot create cache directory " + dir_->string() + ": " + ec.message());
}

std::string ResponseCache::make_key(std::string_view op, const nlohmann::json& inputs) {
  // nlohmann::json keeps object keys sorted, so dump() is canonical.
  std::string material(op);
  material.push_back('\n');
  material += inputs.dump(-1, ' ', true, nlohmann::json::error_handler_t::replace);
  return sha256_hex(material);
}

std::filesystem::path ResponseCache::file_for(const std::string& key) const {
  return *dir_ / (key + ".json");
}

std::optional<nlohmann::json> ResponseCache::get(const std::string& key) const {
  std::lock_guard lock(mutex_);
  if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  if (!dir_) return std::nullopt;
  std::ifstream in(file_for(key));
  if (!in) return std::nullopt;
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("value")) return std::nullopt;
  memory_[key] = doc["value"];
  return doc["value"];
}

nlohmann::json ResponseCache::put_if_absent(const std::string& key, std::string_view op,
                                            nlohmann::json value) {
  if (auto existing = get(key)) return *existing;
  std::lock_guard lock(mutex_);
  if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  memory_[key] = value;
  if (dir_) {
    nlohmann::json doc{{"key", key}, {"op", std::string(op)}, {"value", value}};
    // Write to a unique temporary and rename so readers never see a partial file.
    static std::atomic<unsigned long> counter{0};
    std::ostringstream tmp_name;
    tmp_name << key << ".tmp." << std::this_thread::get_id() << '.' << counter++;
    const auto tmp = *dir_ / tmp_name.str();
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw Error("cannot write cache entry " + tmp.string());
      out << doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, file_for(key), ec);
    if (ec) {
      std::filesystem::remove(tmp, ec);
      throw Error("cannot commit cache entry " + key);
    }
  }
  return value;
}

}  // namespace hallu
