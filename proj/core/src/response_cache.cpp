#include "phishtriage/response_cache.hpp"

#include <mutex>
#include <system_error>

#include <nlohmann/json.hpp>

#include "phishtriage/error.hpp"
#include "phishtriage/fs_util.hpp"
#include "phishtriage/hash.hpp"
#include "phishtriage/prompt.hpp"

namespace phishtriage {

ResponseCache::ResponseCache(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create cache directory " + directory_.string());
}

std::string ResponseCache::make_key(std::string_view model, std::string_view request_hash) {
  static const std::string schema_digest = sha256_hex(verdict_schema().dump());
  std::string material(model);
  material.push_back('\0');
  material.append(request_hash);
  material.push_back('\0');
  material.append(schema_digest);
  return sha256_hex(material);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return directory_ / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto path = path_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const auto doc = nlohmann::json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.contains("payload") || !doc["payload"].is_string()) return std::nullopt;
    return doc["payload"].get<std::string>();
  } catch (const Error&) {
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& key, std::string_view payload) {
  std::unique_lock lock(mutex_);
  const nlohmann::json doc = {{"key", key}, {"payload", payload}};
  write_file_atomic(path_for(key), doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(directory_)) {
    if (entry.path().extension() == ".json") ++n;
  }
  return n;
}

}  // namespace phishtriage
