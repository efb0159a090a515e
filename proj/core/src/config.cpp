#include "phishtriage/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "phishtriage/error.hpp"
#include "phishtriage/fs_util.hpp"

namespace phishtriage {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw Error(ErrorCode::InvalidConfig,
              "config key '" + std::string(key) + "' = '" + std::string(value) + "' is not " + std::string(want));
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line_no) + " has no '='");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line_no) + " has no key");
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    cfg.set(std::move(key), std::move(value));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void KeyValueConfig::set(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }

bool KeyValueConfig::contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::optional<double> KeyValueConfig::get_double(std::string_view key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size()) bad_value(key, *v, "a number");
  return out;
}

std::optional<long long> KeyValueConfig::get_int(std::string_view key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size()) bad_value(key, *v, "an integer");
  return out;
}

std::optional<bool> KeyValueConfig::get_bool(std::string_view key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  const std::string s = lower(*v);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  bad_value(key, *v, "a boolean");
}

ModelConfig model_config_from(const KeyValueConfig& config, ModelConfig base) {
  if (auto v = config.get("endpoint")) base.base_url = *v;
  if (auto v = config.get("model")) base.name = *v;
  if (auto v = config.get("credential_env")) base.credential_env = *v;
  if (auto v = config.get("api_key"); v && !v->empty()) base.api_key = *v;
  if (auto v = config.get_double("temperature")) base.temperature = *v;
  if (auto v = config.get("seed")) {
    if (lower(*v) == "none" || v->empty()) {
      base.seed.reset();
    } else {
      base.seed = static_cast<int>(*config.get_int("seed"));
    }
  }
  if (auto v = config.get_int("max_output_tokens")) base.max_output_tokens = static_cast<int>(*v);
  if (auto v = config.get_double("rate_limit")) base.rate_limit = *v;
  if (auto v = config.get_int("timeout_ms")) base.timeout = std::chrono::milliseconds(*v);
  if (auto v = config.get_int("max_retries")) base.max_retries = static_cast<int>(*v);
  if (auto v = config.get_int("backoff_ms")) base.backoff_base = std::chrono::milliseconds(*v);
  if (auto v = config.get("structured_mode")) {
    const auto mode = structured_mode_from_string(*v);
    if (!mode) bad_value("structured_mode", *v, "response_format, tool_call or prompt_only");
    base.structured_mode = *mode;
  }
  if (auto v = config.get_int("context_chars")) {
    if (*v < 0) bad_value("context_chars", std::to_string(*v), "non-negative");
    base.context_chars = static_cast<std::size_t>(*v);
  }
  return base;
}

}  // namespace phishtriage
