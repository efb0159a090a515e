#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "phishtriage/prompt.hpp"

namespace httplib {
class Server;
}

namespace phishtriage::testing {

/// One scripted reply of the fake chat-completions endpoint.
struct MockReply {
  int status = 200;
  int delay_ms = 0;
  std::optional<Verdict> verdict;
  /// Raw structured content; wins over `verdict`.
  std::optional<std::string> content;
  bool as_tool_call = false;
  std::optional<int> retry_after_s;

  static MockReply from_json(const nlohmann::json& j);
};

/// Replies are served in order; the last one repeats.
struct MockRule {
  std::optional<std::string> match_hash;  ///< request_content_hash of system + user
  std::optional<std::string> contains;    ///< substring of the user message
  std::vector<MockReply> replies;
  std::size_t served = 0;
};

struct MockRequest {
  std::string path;
  nlohmann::json body;
  std::string authorization;
};

/// In-process OpenAI-compatible server on 127.0.0.1 with an ephemeral port.
/// Counts calls and the peak number of requests in flight.
class MockLlmServer {
 public:
  using Responder = std::function<std::optional<MockReply>(const MockRequest&)>;

  MockLlmServer();
  ~MockLlmServer();
  MockLlmServer(const MockLlmServer&) = delete;
  MockLlmServer& operator=(const MockLlmServer&) = delete;

  /// {"default": reply, "rules": [{"match_hash"|"contains", "responses": [reply...]}]}
  void load_fixture(const nlohmann::json& fixture);
  void set_default(MockReply reply);
  void add_rule(MockRule rule);
  /// Consulted before the rules; returning nullopt falls through.
  void set_responder(Responder responder);

  /// Stops listening; later requests fail at the transport level.
  void shut_down();

  std::string base_url() const;
  int port() const noexcept { return port_; }

  std::size_t calls() const noexcept { return calls_.load(); }
  std::size_t max_in_flight() const noexcept { return max_in_flight_.load(); }
  std::vector<MockRequest> requests() const;
  void reset_counters();

 private:
  MockReply pick(const MockRequest& req);

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  MockReply default_reply_;
  std::vector<MockRule> rules_;
  Responder responder_;
  std::vector<MockRequest> requests_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> max_in_flight_{0};
};

/// Chat-completions response body carrying `content`.
std::string chat_completion_body(const std::string& content, bool as_tool_call);

/// A base URL on which nothing listens.
std::string unreachable_base_url();

Verdict make_verdict(bool phishing, Risk risk = Risk::High);

}  // namespace phishtriage::testing
