#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "phishtriage/http.hpp"
#include "phishtriage/public_suffix.hpp"

namespace phishtriage {

enum class Reputation { Clean, Suspicious, Malicious, Unknown };

std::string_view to_string(Reputation reputation) noexcept;

/// Per-engine verdict counts as reported by a multi-engine scanner.
struct EngineTally {
  int malicious = 0;
  int suspicious = 0;
  int harmless = 0;
  int undetected = 0;

  int total() const noexcept { return malicious + suspicious + harmless + undetected; }
};

struct ReputationThresholds {
  int malicious_min = 3;   ///< malicious engines needed for Malicious
  int suspicious_min = 1;  ///< malicious + suspicious engines needed for Suspicious
};

/// Unknown when no engine answered; Clean when engines answered and neither
/// threshold is met.
Reputation classify_tally(const EngineTally& tally, const ReputationThresholds& thresholds = {});

/// Reputation source. Implementations throw Error{ProviderUnavailable} or
/// Error{QuotaExceeded}; lookup_reputation turns both into Unknown.
class ReputationClient {
 public:
  virtual ~ReputationClient() = default;
  virtual Reputation query(std::string_view url) = 0;
};

/// Offline lists of registrable domains: deny -> Malicious, allow -> Clean,
/// anything else Unknown.
class StubReputationClient final : public ReputationClient {
 public:
  StubReputationClient(std::set<std::string> allow, std::set<std::string> deny,
                       const PublicSuffixList& psl = PublicSuffixList::builtin());

  /// One domain per line, '#' comments. Throws Error{UnreadableFile}.
  static std::set<std::string> parse_domain_list(std::string_view text);

  Reputation query(std::string_view url) override;

 private:
  std::set<std::string> allow_;
  std::set<std::string> deny_;
  const PublicSuffixList* psl_;
};

/// Multi-engine scanner API in the VirusTotal v3 shape:
/// GET {base}/urls/{unpadded base64url(url)} with an "x-apikey" header,
/// verdict counts at data.attributes.last_analysis_stats. 404 means the URL
/// was never scanned (Unknown); 429 is QuotaExceeded; other failures are
/// ProviderUnavailable.
class HttpReputationClient final : public ReputationClient {
 public:
  HttpReputationClient(std::string base_url, std::string api_key,
                       ReputationThresholds thresholds = {},
                       std::shared_ptr<HttpTransport> transport = nullptr,
                       std::chrono::milliseconds timeout = std::chrono::seconds(15));

  Reputation query(std::string_view url) override;

  /// Parses the provider response body. Throws Error{ProviderUnavailable}.
  static EngineTally parse_tally(std::string_view body);

 private:
  std::string base_url_;
  std::string api_key_;
  ReputationThresholds thresholds_;
  std::shared_ptr<HttpTransport> transport_;
  std::chrono::milliseconds timeout_;
};

/// Memoizes another client by registrable domain + path and stops calling it
/// for `quota_backoff` after a QuotaExceeded. Thread-safe; failures are counted
/// and rethrown so callers can degrade.
class CachingReputationClient final : public ReputationClient {
 public:
  explicit CachingReputationClient(std::shared_ptr<ReputationClient> inner,
                                   const PublicSuffixList& psl = PublicSuffixList::builtin(),
                                   std::chrono::milliseconds quota_backoff = std::chrono::minutes(1));

  Reputation query(std::string_view url) override;

  std::size_t upstream_calls() const;
  std::size_t failures() const;

 private:
  std::string cache_key(std::string_view url) const;

  std::shared_ptr<ReputationClient> inner_;
  const PublicSuffixList* psl_;
  std::chrono::milliseconds quota_backoff_;
  mutable std::mutex mutex_;
  std::map<std::string, Reputation, std::less<>> cache_;
  std::optional<std::chrono::steady_clock::time_point> blocked_until_;
  std::size_t upstream_calls_ = 0;
  std::size_t failures_ = 0;
};

/// Never throws: a null client or a provider failure yields Unknown.
Reputation lookup_reputation(std::string_view url, ReputationClient* client);

}  // namespace phishtriage
