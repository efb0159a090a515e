#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stop_token>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phishtriage/llm_client.hpp"
#include "phishtriage/pipeline.hpp"
#include "phishtriage/prompt.hpp"
#include "phishtriage/reputation.hpp"
#include "phishtriage/url_analyzer.hpp"

namespace phishtriage {

struct IncomingMessage {
  std::string id;
  std::string raw;
};

/// Mailbox the gateway watches. Implementations throw Error{Io} on failure.
class MailboxAdapter {
 public:
  virtual ~MailboxAdapter() = default;

  /// Unprocessed messages; a processed id is never returned again.
  virtual std::vector<IncomingMessage> poll_new(std::size_t max_messages) = 0;
  virtual void move_to_spam(const std::string& id) = 0;
  virtual void deliver_report(const std::string& id, const std::string& text) = 0;
  /// Idempotent. `tag` records how the message was handled.
  virtual void mark_processed(const std::string& id, std::string_view tag) = 0;
};

/// Trusted senders: exact addresses ("hr@company.com") and domain patterns
/// ("company.com", "@company.com", or "*.company.com" which also covers
/// subdomains). Matching is case-insensitive.
class Whitelist {
 public:
  Whitelist() = default;

  static Whitelist parse(std::string_view text);
  void add(std::string_view entry);
  bool empty() const noexcept { return addresses_.empty() && domains_.empty() && suffixes_.empty(); }

  bool matches_address(std::string_view address) const;

 private:
  std::set<std::string, std::less<>> addresses_;
  std::set<std::string, std::less<>> domains_;
  std::set<std::string, std::less<>> suffixes_;
};

/// Address part of a From value ("Name <a@b.c>" -> "a@b.c"), lower-cased;
/// nullopt when no plausible address is present.
std::optional<std::string> extract_address(std::string_view sender);

/// Display names never count; an unparseable sender is untrusted.
bool filter_trusted(std::string_view sender, const Whitelist& whitelist);

enum class DispositionKind {
  DeliveredTrusted,
  DeliveredClean,
  MovedToSpam,
  DeliveredUnscanned,
  Deferred,  ///< left for the next poll (fail-closed policy or adapter failure)
};

std::string_view to_string(DispositionKind kind) noexcept;

struct Disposition {
  DispositionKind kind = DispositionKind::DeliveredUnscanned;
  std::optional<Verdict> verdict;
  std::optional<std::string> report;
};

enum class FailPolicy { Open, Closed };

struct GatewayConfig {
  Whitelist whitelist;
  PromptOptions prompt;
  PipelineOptions pipeline;
  FailPolicy fail_policy = FailPolicy::Open;
  /// Adds URL findings to the prompt and the user report.
  bool url_analysis = false;
  /// Overrides a clean verdict when any URL has a Malicious reputation.
  bool url_post_check = false;
  AnalyzerOptions analyzer;
  std::shared_ptr<ReputationClient> reputation;
  std::chrono::milliseconds poll_interval{5000};
  std::size_t batch_size = 32;
  std::size_t report_budget = 4000;
};

inline constexpr std::size_t kDefaultReportBudget = 4000;

/// Marks `verdict` as High-risk phishing when a finding's reputation is
/// Malicious, recording each such domain as a red flag.
void escalate_on_malicious_url(Verdict& verdict, const UrlReport& urls);

/// User-facing explanation: summary from the reason, red flags, recommended
/// actions and (when given) URL findings. Empty lists produce no heading.
/// Capped at `max_chars` code points.
std::string generate_user_report(const Verdict& verdict, const UrlReport* findings = nullptr,
                                 std::size_t max_chars = kDefaultReportBudget);

class Gateway {
 public:
  Gateway(GatewayConfig config, MailboxAdapter& mailbox, const LlmClient& client);

  /// Runs one message through trust check, pipeline, classification and the
  /// resulting mailbox action. Adapter failures are retried once, then the
  /// message is Deferred (not marked processed).
  Disposition process_incoming(const std::string& msg_id, std::string_view raw);

  /// Polls once and processes every new message in order.
  std::vector<std::pair<std::string, Disposition>> poll_once();

  /// Polls every poll_interval until stop is requested.
  void run(std::stop_token stop);

  const GatewayConfig& config() const noexcept { return config_; }

 private:
  Disposition classify_message(const std::string& msg_id, std::string_view raw);
  bool with_retry(const char* what, const std::string& msg_id, const std::function<void()>& action);

  GatewayConfig config_;
  MailboxAdapter& mailbox_;
  const LlmClient& client_;
};

}  // namespace phishtriage
