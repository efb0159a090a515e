#include "phishtriage/llm_client.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace phishtriage {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kToolName = "report_verdict";

bool retryable(ErrorCode code) noexcept {
  return code == ErrorCode::TransportError || code == ErrorCode::Timeout || code == ErrorCode::RateLimited;
}

std::string chat_url(const std::string& base_url) {
  std::string url = base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url + "/chat/completions";
}

std::unique_ptr<RateLimiter> make_limiter(double per_minute) {
  // Fractional rates widen the window instead of rounding the count.
  const auto slots = static_cast<std::size_t>(std::max(1.0, std::ceil(per_minute)));
  const auto window = std::chrono::duration_cast<RateLimiter::Clock::duration>(
      std::chrono::duration<double>(60.0 * static_cast<double>(slots) / per_minute));
  return std::make_unique<RateLimiter>(slots, window);
}

std::chrono::milliseconds backoff_delay(const ModelConfig& cfg, int retry_index,
                                        std::optional<std::chrono::milliseconds> retry_after) {
  const double factor = std::pow(2.0, retry_index);
  auto delay = std::chrono::milliseconds(
      static_cast<long long>(std::min(static_cast<double>(cfg.backoff_cap.count()),
                                      static_cast<double>(cfg.backoff_base.count()) * factor)));
  if (retry_after) delay = std::max(delay, std::min(*retry_after, cfg.backoff_cap));
  return delay;
}

}  // namespace

void ModelConfig::validate() const {
  if (name.empty()) throw Error(ErrorCode::InvalidConfig, "model name is empty");
  if (!(rate_limit > 0.0)) throw Error(ErrorCode::InvalidConfig, "rate_limit must be > 0");
  if (timeout <= std::chrono::milliseconds::zero()) throw Error(ErrorCode::InvalidConfig, "timeout must be > 0");
  if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidConfig, "temperature must be >= 0");
  if (max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be >= 0");
  if (max_output_tokens <= 0) throw Error(ErrorCode::InvalidConfig, "max_output_tokens must be > 0");
  split_http_url(base_url);
}

std::string ModelConfig::resolve_credential() const {
  if (api_key) return *api_key;
  if (credential_env.empty()) return {};
  const char* value = std::getenv(credential_env.c_str());
  return value ? std::string(value) : std::string{};
}

json build_chat_payload(const ClassificationRequest& req, const ModelConfig& cfg) {
  json payload = {{"model", cfg.name},
                  {"messages",
                   json::array({{{"role", "system"}, {"content", req.system_prompt}},
                                {{"role", "user"}, {"content", req.user_content}}})},
                  {"temperature", cfg.temperature},
                  {"max_tokens", cfg.max_output_tokens}};
  if (cfg.seed) payload["seed"] = *cfg.seed;
  switch (cfg.structured_mode) {
    case StructuredMode::ResponseFormat:
      payload["response_format"] = {
          {"type", "json_schema"},
          {"json_schema", {{"name", "phishing_verdict"}, {"strict", true}, {"schema", req.output_schema}}}};
      break;
    case StructuredMode::ToolCall:
      payload["tools"] = json::array({{{"type", "function"},
                                       {"function",
                                        {{"name", kToolName},
                                         {"description", "Report the phishing analysis of the email"},
                                         {"parameters", req.output_schema}}}}});
      payload["tool_choice"] = {{"type", "function"}, {"function", {{"name", kToolName}}}};
      break;
    case StructuredMode::PromptOnly:
      break;
  }
  return payload;
}

std::string extract_structured_content(std::string_view response_body) {
  const json doc = json::parse(response_body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::MalformedPayload, "response is not JSON");
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    throw Error(ErrorCode::MalformedPayload, "response has no choices");
  }
  const json& message = (*choices)[0].value("message", json::object());
  if (const auto calls = message.find("tool_calls"); calls != message.end() && calls->is_array() && !calls->empty()) {
    const json& fn = (*calls)[0].value("function", json::object());
    const auto args = fn.find("arguments");
    if (args != fn.end() && args->is_string()) return args->get<std::string>();
    if (args != fn.end() && args->is_object()) return args->dump();
    throw Error(ErrorCode::MalformedPayload, "tool call without arguments");
  }
  const auto content = message.find("content");
  if (content == message.end() || !content->is_string()) {
    throw Error(ErrorCode::MalformedPayload, "response message has no content");
  }
  return content->get<std::string>();
}

struct LlmClient::Shared {
  std::unique_ptr<RateLimiter> limiter;
  std::atomic<std::size_t> calls{0};
};

LlmClient::LlmClient(ModelConfig cfg, std::shared_ptr<HttpTransport> transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), shared_(std::make_shared<Shared>()) {
  cfg_.validate();
  if (!transport_) transport_ = std::make_shared<DefaultHttpTransport>();
  shared_->limiter = make_limiter(cfg_.rate_limit);
}

std::size_t LlmClient::network_calls() const noexcept { return shared_->calls.load(); }

ClassificationOutcome LlmClient::classify(const ClassificationRequest& req, std::string record_id) const {
  ClassificationOutcome outcome;
  outcome.record_id = std::move(record_id);
  const auto started = Clock::now();
  const auto finish = [&](ClassificationOutcome& o) -> ClassificationOutcome {
    o.latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
    return std::move(o);
  };

  const std::string url = chat_url(cfg_.base_url);
  const std::string body = build_chat_payload(req, cfg_).dump(-1, ' ', false, json::error_handler_t::replace);
  HttpHeaders headers{{"Accept", "application/json"}};
  if (const std::string key = cfg_.resolve_credential(); !key.empty()) {
    headers.emplace_back("Authorization", "Bearer " + key);
  }

  OutcomeError last{ErrorCode::TransportError, "no attempt made"};
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    shared_->limiter->acquire();
    ++outcome.attempts;
    ++shared_->calls;
    std::optional<std::chrono::milliseconds> retry_after;
    try {
      const HttpResponse resp = transport_->post(url, body, headers, cfg_.timeout);
      if (resp.status >= 200 && resp.status < 300) {
        try {
          outcome.raw_payload = extract_structured_content(resp.body);
          outcome.verdict = parse_verdict(outcome.raw_payload);
        } catch (const Error& e) {
          outcome.error = OutcomeError{e.code(), e.what()};
        }
        return finish(outcome);
      }
      const std::string status = "HTTP " + std::to_string(resp.status);
      if (resp.status == 401 || resp.status == 403) {
        outcome.error = OutcomeError{ErrorCode::AuthError, status + " from " + cfg_.base_url};
        return finish(outcome);
      }
      if (resp.status == 429) {
        last = {ErrorCode::RateLimited, status + ": rate limited"};
        retry_after = resp.retry_after;
      } else if (resp.status >= 500) {
        last = {ErrorCode::TransportError, status + ": server error"};
      } else {
        outcome.error = OutcomeError{ErrorCode::HttpStatus, status + ": " + resp.body.substr(0, 200)};
        return finish(outcome);
      }
    } catch (const Error& e) {
      last = {e.code(), e.what()};
      if (!retryable(e.code())) break;
    }
    if (attempt < cfg_.max_retries) {
      const auto delay = backoff_delay(cfg_, attempt, retry_after);
      spdlog::debug("{}: attempt {} failed ({}), retrying in {} ms", cfg_.name, attempt + 1, last.message,
                    delay.count());
      std::this_thread::sleep_for(delay);
    }
  }
  outcome.error = std::move(last);
  return finish(outcome);
}

ClassificationOutcome classify_email(const ClassificationRequest& req, const ModelConfig& cfg) {
  try {
    return LlmClient(cfg).classify(req);
  } catch (const Error& e) {
    ClassificationOutcome outcome;
    outcome.error = OutcomeError{e.code(), e.what()};
    return outcome;
  }
}

BatchResult classify_batch(std::span<const UniformRecord> records, const LlmClient& client,
                           const BatchOptions& options) {
  if (options.parallelism == 0) throw Error(ErrorCode::InvalidConfig, "parallelism must be >= 1");
  BatchResult result;
  result.outcomes.resize(records.size());
  PromptOptions prompt = options.prompt;
  if (prompt.max_email_chars == 0) prompt.max_email_chars = client.config().context_chars;

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> cache_hits{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      const auto& rec = records[i];
      ClassificationOutcome outcome;
      try {
        const ClassificationRequest req = build_request(rec, prompt);
        std::optional<std::string> key;
        if (options.cache) {
          key = ResponseCache::make_key(client.config().name, request_content_hash(req));
          if (auto payload = options.cache->get(*key)) {
            try {
              outcome.verdict = parse_verdict(*payload);
              outcome.raw_payload = std::move(*payload);
              outcome.record_id = rec.id;
              outcome.from_cache = true;
              ++cache_hits;
              result.outcomes[i] = std::move(outcome);
              continue;
            } catch (const Error&) {
              // A corrupt entry is simply refetched.
            }
          }
        }
        outcome = client.classify(req, rec.id);
        if (outcome.verdict && key) options.cache->put(*key, outcome.raw_payload);
      } catch (const Error& e) {
        outcome = ClassificationOutcome{};
        outcome.record_id = rec.id;
        outcome.error = OutcomeError{e.code(), e.what()};
      }
      result.outcomes[i] = std::move(outcome);
    }
  };

  const std::size_t workers = std::min(options.parallelism, std::max<std::size_t>(records.size(), 1));
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  result.cache_hits = cache_hits.load();
  for (const auto& o : result.outcomes) {
    if (o.error) ++result.error_counts[std::string(to_string(o.error->code))];
  }
  return result;
}

json outcome_to_json(const ClassificationOutcome& outcome, std::optional<Label> truth) {
  json line = {{"id", outcome.record_id},
               {"verdict", outcome.verdict ? verdict_to_json(*outcome.verdict) : json()},
               {"error", outcome.error ? json{{"code", to_string(outcome.error->code)},
                                              {"message", outcome.error->message}}
                                       : json()},
               {"latency_ms", outcome.latency.count()},
               {"attempts", outcome.attempts},
               {"cached", outcome.from_cache}};
  if (truth) line["label"] = to_string(*truth);
  return line;
}

LabeledOutcome outcome_from_json(const json& line) {
  if (!line.is_object() || !line.contains("id")) throw Error(ErrorCode::MalformedPayload, "outcome line has no id");
  LabeledOutcome out;
  auto& o = out.outcome;
  o.record_id = line["id"].is_string() ? line["id"].get<std::string>() : line["id"].dump();
  if (const auto v = line.find("verdict"); v != line.end() && !v->is_null()) {
    o.verdict = parse_verdict(v->dump());
    o.raw_payload = v->dump();
  }
  if (const auto e = line.find("error"); e != line.end() && !e->is_null()) {
    OutcomeError err;
    const std::string code = e->is_object() ? e->value("code", std::string{}) : std::string{};
    err.code = error_code_from_string(code).value_or(ErrorCode::TransportError);
    err.message = e->is_object() ? e->value("message", std::string{}) : e->dump();
    o.error = std::move(err);
  }
  if (o.verdict.has_value() == o.error.has_value()) {
    throw Error(ErrorCode::MalformedPayload, "outcome " + o.record_id + " must carry exactly one of verdict/error");
  }
  o.latency = std::chrono::milliseconds(line.value("latency_ms", 0LL));
  o.attempts = line.value("attempts", 0);
  o.from_cache = line.value("cached", false);
  if (const auto l = line.find("label"); l != line.end() && l->is_string()) {
    out.truth = label_from_string(l->get<std::string>());
    if (!out.truth) throw Error(ErrorCode::MalformedPayload, "outcome " + o.record_id + " has an invalid label");
  }
  return out;
}

}  // namespace phishtriage
