#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

namespace phishtriage {

/// Content-addressed store of raw verdict payloads, one file per key under a
/// directory, so interrupted batch runs resume without repeating calls.
/// Concurrent readers, serialized writers.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path directory);

  /// Key for a request: model name plus request content hash plus the schema
  /// revision, digested.
  static std::string make_key(std::string_view model, std::string_view request_hash);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, std::string_view payload);

  std::size_t size() const;
  const std::filesystem::path& directory() const noexcept { return directory_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path directory_;
  mutable std::shared_mutex mutex_;
};

}  // namespace phishtriage
