#include <gtest/gtest.h>

#include <cstdlib>

#include "mock_llm_server.hpp"
#include "phishtriage/error.hpp"
#include "phishtriage/llm_client.hpp"
#include "test_paths.hpp"

namespace phishtriage {
namespace {

using testing::MockLlmServer;
using testing::MockReply;
using testing::MockRule;
using testing::make_verdict;

ModelConfig config_for(const MockLlmServer& server) {
  ModelConfig cfg;
  cfg.base_url = server.base_url();
  cfg.backoff_base = std::chrono::milliseconds(5);
  cfg.backoff_cap = std::chrono::milliseconds(50);
  cfg.timeout = std::chrono::milliseconds(2000);
  cfg.rate_limit = 6000;
  cfg.credential_env = "PHISHTRIAGE_TEST_UNSET_KEY";
  return cfg;
}

ClassificationRequest request(const std::string& text = "SUBJECT: a, FROM: b, EMAIL: c") {
  UniformRecord r;
  r.email_text = text;
  return build_request(r);
}

std::vector<UniformRecord> corpus(std::size_t n) {
  std::vector<UniformRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    UniformRecord r;
    r.id = "rec-" + std::to_string(i);
    r.email_text = "SUBJECT: s" + std::to_string(i) + ", FROM: f, EMAIL: body marker-" + std::to_string(i) + ";";
    r.label = i % 2 ? Label::Phishing : Label::Legit;
    records.push_back(std::move(r));
  }
  return records;
}

MockReply status(int code) {
  MockReply r;
  r.status = code;
  return r;
}

MockReply verdict_reply(bool phishing) {
  MockReply r;
  r.verdict = make_verdict(phishing);
  return r;
}

TEST(LlmClient, HappyPath) {
  MockLlmServer server;
  server.set_default(verdict_reply(true));
  const LlmClient client(config_for(server));
  const auto outcome = client.classify(request(), "id1");
  ASSERT_TRUE(outcome.verdict) << outcome.error->message;
  EXPECT_TRUE(outcome.verdict->is_phishing);
  EXPECT_EQ(outcome.attempts, 1);
  EXPECT_FALSE(outcome.error);
  EXPECT_EQ(server.calls(), 1u);
}

TEST(LlmClient, RetriesRateLimitThenSucceeds) {
  MockLlmServer server;
  server.add_rule(MockRule{std::nullopt, "EMAIL", {status(429), status(429), verdict_reply(false)}});
  ModelConfig cfg = config_for(server);
  cfg.max_retries = 3;
  const auto outcome = LlmClient(cfg).classify(request());
  ASSERT_TRUE(outcome.verdict);
  EXPECT_EQ(outcome.attempts, 3);
  EXPECT_EQ(server.calls(), 3u);
}

TEST(LlmClient, RateLimitedAfterRetriesExhausted) {
  MockLlmServer server;
  server.set_default(status(429));
  ModelConfig cfg = config_for(server);
  cfg.max_retries = 2;
  const auto outcome = LlmClient(cfg).classify(request());
  ASSERT_TRUE(outcome.error);
  EXPECT_EQ(outcome.error->code, ErrorCode::RateLimited);
  EXPECT_EQ(outcome.attempts, 3);
}

TEST(LlmClient, MissingReasonIsSchemaViolation) {
  MockLlmServer server;
  MockReply r;
  r.content = R"({"Is_Phishing": true, "Risk": "High", "Social_Engineering_Elements": [], "Actions": []})";
  server.set_default(r);
  const auto outcome = LlmClient(config_for(server)).classify(request());
  ASSERT_TRUE(outcome.error);
  EXPECT_EQ(outcome.error->code, ErrorCode::SchemaViolation);
  EXPECT_FALSE(outcome.verdict);
}

TEST(LlmClient, AuthErrorNotRetried) {
  MockLlmServer server;
  server.set_default(status(401));
  const auto outcome = LlmClient(config_for(server)).classify(request());
  ASSERT_TRUE(outcome.error);
  EXPECT_EQ(outcome.error->code, ErrorCode::AuthError);
  EXPECT_EQ(outcome.attempts, 1);
}

TEST(LlmClient, ServerErrorsRetriedThenTransportError) {
  MockLlmServer server;
  server.set_default(status(503));
  ModelConfig cfg = config_for(server);
  cfg.max_retries = 1;
  const auto outcome = LlmClient(cfg).classify(request());
  ASSERT_TRUE(outcome.error);
  EXPECT_EQ(outcome.error->code, ErrorCode::TransportError);
  EXPECT_EQ(outcome.attempts, 2);
}

TEST(LlmClient, UnreachableEndpoint) {
  ModelConfig cfg;
  cfg.base_url = testing::unreachable_base_url();
  cfg.max_retries = 1;
  cfg.backoff_base = std::chrono::milliseconds(1);
  const auto outcome = LlmClient(cfg).classify(request());
  ASSERT_TRUE(outcome.error);
  EXPECT_EQ(outcome.error->code, ErrorCode::TransportError);
}

TEST(LlmClient, SlowEndpointTimesOut) {
  MockLlmServer server;
  MockReply slow = verdict_reply(false);
  slow.delay_ms = 600;
  server.set_default(slow);
  ModelConfig cfg = config_for(server);
  cfg.timeout = std::chrono::milliseconds(150);
  cfg.max_retries = 0;
  const auto outcome = LlmClient(cfg).classify(request());
  ASSERT_TRUE(outcome.error);
  EXPECT_EQ(outcome.error->code, ErrorCode::Timeout);
}

TEST(LlmClient, ToolCallMode) {
  MockLlmServer server;
  MockReply r = verdict_reply(true);
  r.as_tool_call = true;
  server.set_default(r);
  ModelConfig cfg = config_for(server);
  cfg.structured_mode = StructuredMode::ToolCall;
  const auto outcome = LlmClient(cfg).classify(request());
  ASSERT_TRUE(outcome.verdict);
  const auto sent = server.requests().at(0).body;
  EXPECT_EQ(sent["tool_choice"]["function"]["name"], "report_verdict");
  EXPECT_TRUE(sent["tools"][0]["function"]["parameters"].contains("required"));
}

TEST(LlmClient, PayloadShape) {
  MockLlmServer server;
  ModelConfig cfg = config_for(server);
  cfg.api_key = "sk-test";
  LlmClient(cfg).classify(request());
  const auto req = server.requests().at(0);
  EXPECT_EQ(req.path, "/v1/chat/completions");
  EXPECT_EQ(req.authorization, "Bearer sk-test");
  EXPECT_EQ(req.body["model"], "llama-3.1-70b");
  EXPECT_EQ(req.body["temperature"], 0.0);
  EXPECT_EQ(req.body["messages"][0]["role"], "system");
  EXPECT_EQ(req.body["messages"][1]["content"], "SUBJECT: a, FROM: b, EMAIL: c");
  EXPECT_EQ(req.body["response_format"]["json_schema"]["strict"], true);
}

TEST(LlmClient, CredentialFromEnvironment) {
  MockLlmServer server;
  ModelConfig cfg = config_for(server);
  cfg.credential_env = "PHISHTRIAGE_TEST_KEY_ENV";
  ::setenv("PHISHTRIAGE_TEST_KEY_ENV", "from-env", 1);
  LlmClient(cfg).classify(request());
  ::unsetenv("PHISHTRIAGE_TEST_KEY_ENV");
  EXPECT_EQ(server.requests().at(0).authorization, "Bearer from-env");
}

TEST(ModelConfig, Validation) {
  ModelConfig cfg;
  cfg.rate_limit = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = ModelConfig{};
  cfg.timeout = std::chrono::milliseconds(0);
  EXPECT_THROW(cfg.validate(), Error);
  cfg = ModelConfig{};
  cfg.temperature = -0.1;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_NO_THROW(ModelConfig{}.validate());
}

TEST(ClassifyBatch, OrderPreserved) {
  MockLlmServer server;
  server.set_responder([](const testing::MockRequest& req) -> std::optional<MockReply> {
    // Later records answer faster so completion order differs from input order.
    const std::string user = req.body["messages"][1]["content"];
    const auto pos = user.find("marker-");
    const int n = std::stoi(user.substr(pos + 7));
    MockReply r = verdict_reply(n % 2 == 1);
    r.delay_ms = (10 - n) * 5;
    return r;
  });
  const LlmClient client(config_for(server));
  const auto records = corpus(10);
  BatchOptions opts;
  opts.parallelism = 4;
  const auto result = classify_batch(records, client, opts);
  ASSERT_EQ(result.outcomes.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(result.outcomes[i].record_id, records[i].id);
    ASSERT_TRUE(result.outcomes[i].verdict);
    EXPECT_EQ(result.outcomes[i].verdict->is_phishing, i % 2 == 1);
  }
  EXPECT_LE(server.max_in_flight(), 4u);
}

TEST(ClassifyBatch, InFlightBound) {
  MockLlmServer server;
  MockReply slow = verdict_reply(false);
  slow.delay_ms = 40;
  server.set_default(slow);
  const LlmClient client(config_for(server));
  BatchOptions opts;
  opts.parallelism = 3;
  classify_batch(corpus(15), client, opts);
  EXPECT_LE(server.max_in_flight(), 3u);
  EXPECT_GE(server.max_in_flight(), 2u);
}

TEST(ClassifyBatch, CacheSkipsNetwork) {
  MockLlmServer server;
  server.set_default(verdict_reply(true));
  testing::TempDir dir;
  ResponseCache cache(dir.path());
  const LlmClient client(config_for(server));
  BatchOptions opts;
  opts.cache = &cache;
  const auto records = corpus(6);
  const auto first = classify_batch(records, client, opts);
  EXPECT_EQ(server.calls(), 6u);
  server.reset_counters();
  const auto second = classify_batch(records, client, opts);
  EXPECT_EQ(server.calls(), 0u);
  EXPECT_EQ(second.cache_hits, 6u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(second.outcomes[i].raw_payload, first.outcomes[i].raw_payload);
    EXPECT_TRUE(second.outcomes[i].from_cache);
  }
}

TEST(ClassifyBatch, OneFailureDoesNotAbort) {
  MockLlmServer server;
  server.add_rule(MockRule{std::nullopt, "marker-3;", {status(400)}});
  const LlmClient client(config_for(server));
  const auto result = classify_batch(corpus(10), client);
  std::size_t verdicts = 0;
  for (const auto& o : result.outcomes) verdicts += o.verdict.has_value();
  EXPECT_EQ(verdicts, 9u);
  ASSERT_TRUE(result.outcomes[3].error);
  EXPECT_EQ(result.error_counts.at("HttpStatus"), 1u);
}

TEST(ClassifyBatch, ZeroParallelismRejected) {
  MockLlmServer server;
  const LlmClient client(config_for(server));
  BatchOptions opts;
  opts.parallelism = 0;
  EXPECT_THROW(classify_batch(corpus(1), client, opts), Error);
}

TEST(OutcomeJson, RoundTrip) {
  ClassificationOutcome o;
  o.record_id = "abc";
  o.verdict = make_verdict(true, Risk::Medium);
  o.latency = std::chrono::milliseconds(12);
  o.attempts = 2;
  const auto back = outcome_from_json(outcome_to_json(o, Label::Legit));
  EXPECT_EQ(back.truth, Label::Legit);
  EXPECT_EQ(back.outcome.record_id, "abc");
  EXPECT_EQ(back.outcome.verdict, o.verdict);
  EXPECT_EQ(back.outcome.attempts, 2);

  ClassificationOutcome e;
  e.record_id = "def";
  e.error = OutcomeError{ErrorCode::Timeout, "slow"};
  const auto eback = outcome_from_json(outcome_to_json(e));
  ASSERT_TRUE(eback.outcome.error);
  EXPECT_EQ(eback.outcome.error->code, ErrorCode::Timeout);
  EXPECT_FALSE(eback.truth);
}

TEST(RateLimiter, WindowBoundsGrants) {
  RateLimiter limiter(3, std::chrono::milliseconds(200));
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 6; ++i) limiter.acquire();
  EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(195));
}

TEST(ResponseCache, PersistsAcrossInstances) {
  testing::TempDir dir;
  const std::string key = ResponseCache::make_key("m", "hash");
  {
    ResponseCache cache(dir.path());
    cache.put(key, "{\"x\":1}");
  }
  ResponseCache again(dir.path());
  EXPECT_EQ(again.get(key), "{\"x\":1}");
  EXPECT_EQ(again.size(), 1u);
  EXPECT_NE(ResponseCache::make_key("m2", "hash"), key);
}

}  // namespace
}  // namespace phishtriage
