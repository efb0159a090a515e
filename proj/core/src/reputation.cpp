#include "phishtriage/reputation.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>

#include "phishtriage/encoding.hpp"
#include "phishtriage/error.hpp"
#include "phishtriage/url_analyzer.hpp"

namespace phishtriage {
namespace {

std::string base64url_unpadded(std::string_view text) {
  std::string out = base64_encode(text);
  for (char& c : out) {
    if (c == '+') c = '-';
    else if (c == '/') c = '_';
  }
  while (!out.empty() && out.back() == '=') out.pop_back();
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string url_path(std::string_view url) {
  auto scheme = url.find("://");
  std::size_t start = scheme == std::string_view::npos ? 0 : scheme + 3;
  const auto slash = url.find_first_of("/?#", start);
  if (slash == std::string_view::npos) return "/";
  auto path = url.substr(slash);
  path = path.substr(0, path.find_first_of("?#"));
  return path.empty() ? "/" : std::string(path);
}

}  // namespace

std::string_view to_string(Reputation reputation) noexcept {
  switch (reputation) {
    case Reputation::Clean: return "Clean";
    case Reputation::Suspicious: return "Suspicious";
    case Reputation::Malicious: return "Malicious";
    case Reputation::Unknown: break;
  }
  return "Unknown";
}

Reputation classify_tally(const EngineTally& tally, const ReputationThresholds& thresholds) {
  if (tally.total() <= 0) return Reputation::Unknown;
  if (tally.malicious >= thresholds.malicious_min) return Reputation::Malicious;
  if (tally.malicious + tally.suspicious >= thresholds.suspicious_min) return Reputation::Suspicious;
  return Reputation::Clean;
}

StubReputationClient::StubReputationClient(std::set<std::string> allow, std::set<std::string> deny,
                                           const PublicSuffixList& psl)
    : allow_(std::move(allow)), deny_(std::move(deny)), psl_(&psl) {}

std::set<std::string> StubReputationClient::parse_domain_list(std::string_view text) {
  std::set<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    line = line.substr(0, line.find('#'));
    std::string entry = trim(line);
    std::transform(entry.begin(), entry.end(), entry.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (!entry.empty()) out.insert(std::move(entry));
  }
  return out;
}

Reputation StubReputationClient::query(std::string_view url) {
  const auto host = url_host(url);
  if (!host) return Reputation::Unknown;
  const std::string domain = psl_->registrable_domain(*host);
  if (deny_.contains(domain) || deny_.contains(*host)) return Reputation::Malicious;
  if (allow_.contains(domain) || allow_.contains(*host)) return Reputation::Clean;
  return Reputation::Unknown;
}

HttpReputationClient::HttpReputationClient(std::string base_url, std::string api_key,
                                           ReputationThresholds thresholds,
                                           std::shared_ptr<HttpTransport> transport,
                                           std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      thresholds_(thresholds),
      transport_(std::move(transport)),
      timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  split_http_url(base_url_);
  if (!transport_) transport_ = std::make_shared<DefaultHttpTransport>();
}

EngineTally HttpReputationClient::parse_tally(std::string_view body) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  const nlohmann::json::json_pointer ptr("/data/attributes/last_analysis_stats");
  if (doc.is_discarded() || !doc.contains(ptr) || !doc[ptr].is_object()) {
    throw Error(ErrorCode::ProviderUnavailable, "reputation response lacks last_analysis_stats");
  }
  const auto& stats = doc[ptr];
  const auto count = [&](const char* key) {
    const auto it = stats.find(key);
    return it != stats.end() && it->is_number_integer() ? std::max(0, it->get<int>()) : 0;
  };
  return EngineTally{count("malicious"), count("suspicious"), count("harmless"), count("undetected")};
}

Reputation HttpReputationClient::query(std::string_view url) {
  HttpHeaders headers{{"Accept", "application/json"}};
  if (!api_key_.empty()) headers.emplace_back("x-apikey", api_key_);
  HttpResponse resp;
  try {
    resp = transport_->get(base_url_ + "/urls/" + base64url_unpadded(url), headers, timeout_);
  } catch (const Error& e) {
    throw Error(ErrorCode::ProviderUnavailable, e.what());
  }
  if (resp.status == 404) return Reputation::Unknown;
  if (resp.status == 429) throw Error(ErrorCode::QuotaExceeded, "reputation provider quota exceeded");
  if (resp.status < 200 || resp.status >= 300) {
    throw Error(ErrorCode::ProviderUnavailable, "reputation provider returned HTTP " + std::to_string(resp.status));
  }
  return classify_tally(parse_tally(resp.body), thresholds_);
}

CachingReputationClient::CachingReputationClient(std::shared_ptr<ReputationClient> inner,
                                                 const PublicSuffixList& psl,
                                                 std::chrono::milliseconds quota_backoff)
    : inner_(std::move(inner)), psl_(&psl), quota_backoff_(quota_backoff) {}

std::string CachingReputationClient::cache_key(std::string_view url) const {
  const auto host = url_host(url);
  return (host ? psl_->registrable_domain(*host) : std::string(url)) + url_path(url);
}

Reputation CachingReputationClient::query(std::string_view url) {
  const std::string key = cache_key(url);
  {
    std::lock_guard lock(mutex_);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (blocked_until_ && std::chrono::steady_clock::now() < *blocked_until_) {
      ++failures_;
      throw Error(ErrorCode::QuotaExceeded, "reputation quota backoff in effect");
    }
    ++upstream_calls_;
  }
  try {
    const Reputation result = inner_->query(url);
    std::lock_guard lock(mutex_);
    cache_.emplace(key, result);
    return result;
  } catch (const Error& e) {
    std::lock_guard lock(mutex_);
    ++failures_;
    if (e.code() == ErrorCode::QuotaExceeded) blocked_until_ = std::chrono::steady_clock::now() + quota_backoff_;
    throw;
  }
}

std::size_t CachingReputationClient::upstream_calls() const {
  std::lock_guard lock(mutex_);
  return upstream_calls_;
}

std::size_t CachingReputationClient::failures() const {
  std::lock_guard lock(mutex_);
  return failures_;
}

Reputation lookup_reputation(std::string_view url, ReputationClient* client) {
  if (!client) return Reputation::Unknown;
  try {
    return client->query(url);
  } catch (const std::exception& e) {
    spdlog::warn("reputation lookup for {} failed: {}", url, e.what());
    return Reputation::Unknown;
  }
}

}  // namespace phishtriage
