#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "phishtriage/llm_client.hpp"

namespace phishtriage {

/// Flat "key = value" document; '#' starts a comment line. Later keys win.
class KeyValueConfig {
 public:
  /// Throws Error{InvalidConfig} on a line without '='.
  static KeyValueConfig parse(std::string_view text);
  /// Throws Error{UnreadableFile} / Error{InvalidConfig}.
  static KeyValueConfig load(const std::filesystem::path& path);

  std::optional<std::string> get(std::string_view key) const;
  void set(std::string key, std::string value);
  bool contains(std::string_view key) const;
  const std::map<std::string, std::string, std::less<>>& entries() const noexcept { return entries_; }

  /// Typed accessors; throw Error{InvalidConfig} on malformed values.
  std::optional<double> get_double(std::string_view key) const;
  std::optional<long long> get_int(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

/// Model settings from config keys: endpoint, model, credential_env, api_key,
/// temperature, seed, max_output_tokens, rate_limit, timeout_ms, max_retries,
/// backoff_ms, structured_mode, context_chars. Missing keys keep defaults.
ModelConfig model_config_from(const KeyValueConfig& config, ModelConfig base = {});

}  // namespace phishtriage
