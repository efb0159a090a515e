#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phishtriage/error.hpp"
#include "phishtriage/http.hpp"
#include "phishtriage/prompt.hpp"
#include "phishtriage/rate_limiter.hpp"
#include "phishtriage/response_cache.hpp"

namespace phishtriage {

/// One OpenAI-compatible chat-completions endpoint.
struct ModelConfig {
  std::string name = "llama-3.1-70b";
  std::string base_url = "http://127.0.0.1:8080/v1";
  /// Environment variable holding the API key. Ignored when `api_key` is set.
  std::string credential_env = "PHISHTRIAGE_API_KEY";
  /// Key read from a config file; never accepted on the command line.
  std::optional<std::string> api_key;
  double temperature = 0.0;
  std::optional<int> seed = 0;
  int max_output_tokens = 1024;
  double rate_limit = 60.0;  ///< requests per minute
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{30'000};
  StructuredMode structured_mode = StructuredMode::ResponseFormat;
  /// Email budget in code points (see PromptOptions::max_email_chars).
  std::size_t context_chars = 24'000;

  /// Throws Error{InvalidConfig} unless rate_limit > 0, timeout > 0,
  /// temperature >= 0 and max_retries >= 0.
  void validate() const;

  /// Empty when neither api_key nor the environment variable is set.
  std::string resolve_credential() const;
};

struct OutcomeError {
  ErrorCode code = ErrorCode::TransportError;
  std::string message;
};

/// Exactly one of verdict / error is set.
struct ClassificationOutcome {
  std::string record_id;
  std::optional<Verdict> verdict;
  std::optional<OutcomeError> error;
  std::chrono::milliseconds latency{0};
  int attempts = 0;
  /// The structured-output content the verdict was parsed from.
  std::string raw_payload;
  bool from_cache = false;
};

/// Chat-completions request body for `req` (model, messages, sampling and the
/// schema carried per the configured structured mode).
nlohmann::json build_chat_payload(const ClassificationRequest& req, const ModelConfig& cfg);

/// Pulls the structured content out of a chat-completions response: the
/// first tool call's arguments when present, else the message content.
/// Throws Error{MalformedPayload}.
std::string extract_structured_content(std::string_view response_body);

class LlmClient {
 public:
  /// Throws Error{InvalidConfig}. A null transport selects DefaultHttpTransport.
  explicit LlmClient(ModelConfig cfg, std::shared_ptr<HttpTransport> transport = nullptr);

  /// One classification: rate-limited, retried with exponential backoff on
  /// transport errors, timeouts, 429 and 5xx; never throws.
  ClassificationOutcome classify(const ClassificationRequest& req,
                                 std::string record_id = {}) const;

  const ModelConfig& config() const noexcept { return cfg_; }

  /// Number of HTTP requests issued so far (all attempts).
  std::size_t network_calls() const noexcept;

 private:
  struct Shared;

  ModelConfig cfg_;
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<Shared> shared_;
};

/// Single request with a fresh client and the default transport.
ClassificationOutcome classify_email(const ClassificationRequest& req, const ModelConfig& cfg);

struct BatchOptions {
  std::size_t parallelism = 4;
  ResponseCache* cache = nullptr;
  PromptOptions prompt;
};

struct BatchResult {
  std::vector<ClassificationOutcome> outcomes;  ///< corpus order
  std::map<std::string, std::size_t> error_counts;
  std::size_t cache_hits = 0;
};

/// Classifies every record with at most `parallelism` requests in flight.
/// Per-record failures become error outcomes; the batch never aborts.
/// Throws Error{InvalidConfig} when parallelism is 0.
BatchResult classify_batch(std::span<const UniformRecord> records, const LlmClient& client,
                           const BatchOptions& options = {});

/// Line-delimited JSON record for the outcomes file: id, label (when known),
/// verdict, error, latency_ms, attempts, cached.
nlohmann::json outcome_to_json(const ClassificationOutcome& outcome,
                               std::optional<Label> truth = std::nullopt);

struct LabeledOutcome {
  std::optional<Label> truth;
  ClassificationOutcome outcome;
};

/// Inverse of outcome_to_json. Throws Error{MalformedPayload}.
LabeledOutcome outcome_from_json(const nlohmann::json& line);

}  // namespace phishtriage
