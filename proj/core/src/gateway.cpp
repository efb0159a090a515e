#include "phishtriage/gateway.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <condition_variable>
#include <mutex>

#include "phishtriage/encoding.hpp"
#include "phishtriage/error.hpp"
#include "phishtriage/mime.hpp"
#include "phishtriage/utf8.hpp"

namespace phishtriage {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool plausible_address(std::string_view a) {
  const auto at = a.find('@');
  if (at == std::string_view::npos || at == 0 || at + 1 >= a.size()) return false;
  if (a.find('@', at + 1) != std::string_view::npos) return false;
  return std::none_of(a.begin(), a.end(), [](unsigned char c) { return std::isspace(c) || c == '<' || c == '>'; });
}

}  // namespace

std::string_view to_string(DispositionKind kind) noexcept {
  switch (kind) {
    case DispositionKind::DeliveredTrusted: return "DeliveredTrusted";
    case DispositionKind::DeliveredClean: return "DeliveredClean";
    case DispositionKind::MovedToSpam: return "MovedToSpam";
    case DispositionKind::DeliveredUnscanned: return "DeliveredUnscanned";
    case DispositionKind::Deferred: break;
  }
  return "Deferred";
}

Whitelist Whitelist::parse(std::string_view text) {
  Whitelist wl;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    line = line.substr(0, line.find('#'));
    wl.add(line);
  }
  return wl;
}

void Whitelist::add(std::string_view entry_in) {
  std::string entry = lower(trim(entry_in));
  if (entry.empty()) return;
  if (entry.starts_with("*.")) {
    suffixes_.insert(entry.substr(2));
  } else if (entry.front() == '@') {
    domains_.insert(entry.substr(1));
  } else if (entry.find('@') != std::string::npos) {
    addresses_.insert(std::move(entry));
  } else {
    domains_.insert(std::move(entry));
  }
}

bool Whitelist::matches_address(std::string_view address_in) const {
  const std::string address = lower(trim(address_in));
  if (!plausible_address(address)) return false;
  if (addresses_.contains(address)) return true;
  std::string_view domain = std::string_view(address).substr(address.find('@') + 1);
  if (domains_.contains(domain)) return true;
  // "*.x" covers x and every subdomain of x.
  while (true) {
    if (suffixes_.contains(domain)) return true;
    const auto dot = domain.find('.');
    if (dot == std::string_view::npos) return false;
    domain.remove_prefix(dot + 1);
  }
}

std::optional<std::string> extract_address(std::string_view sender) {
  std::string candidate;
  const auto close = sender.rfind('>');
  const auto open = close == std::string_view::npos ? std::string_view::npos : sender.rfind('<', close);
  if (open != std::string_view::npos) {
    candidate = trim(sender.substr(open + 1, close - open - 1));
  } else if (sender.find('<') != std::string_view::npos) {
    return std::nullopt;
  } else {
    // Bare form, possibly followed by a "(comment)".
    candidate = trim(sender.substr(0, sender.find('(')));
  }
  if (candidate.starts_with("mailto:")) candidate.erase(0, 7);
  candidate = lower(candidate);
  if (!plausible_address(candidate)) return std::nullopt;
  return candidate;
}

bool filter_trusted(std::string_view sender, const Whitelist& whitelist) {
  if (whitelist.empty()) return false;
  const auto address = extract_address(sender);
  return address && whitelist.matches_address(*address);
}

std::string generate_user_report(const Verdict& verdict, const UrlReport* findings, std::size_t max_chars) {
  std::string out;
  out += verdict.is_phishing ? "This email was flagged as a likely phishing attempt"
                             : "This email was assessed as legitimate";
  out += " (risk: " + std::string(to_string(verdict.risk)) + ").\n";
  if (!trim(verdict.reason).empty()) out += "\nSummary:\n" + trim(verdict.reason) + "\n";
  const auto list = [&](const char* heading, const std::vector<std::string>& items) {
    if (items.empty()) return;
    out += std::string("\n") + heading + ":\n";
    for (const auto& item : items) out += "- " + item + "\n";
  };
  list("Red flags", verdict.social_engineering_elements);
  list("Recommended actions", verdict.actions);
  if (findings && !findings->findings.empty()) out += "\nURL findings:\n" + findings->summary + "\n";
  if (utf8::codepoint_count(out) > max_chars) {
    constexpr std::string_view kCut = "\n[report truncated]";
    const std::size_t keep = max_chars > kCut.size() ? max_chars - kCut.size() : 0;
    out = std::string(utf8::prefix_codepoints(out, keep));
    if (max_chars > kCut.size()) out += kCut;
  }
  return out;
}

Gateway::Gateway(GatewayConfig config, MailboxAdapter& mailbox, const LlmClient& client)
    : config_(std::move(config)), mailbox_(mailbox), client_(client) {
  if (config_.batch_size == 0) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  if (config_.poll_interval <= std::chrono::milliseconds::zero()) {
    throw Error(ErrorCode::InvalidConfig, "poll_interval must be > 0");
  }
}

bool Gateway::with_retry(const char* what, const std::string& msg_id, const std::function<void()>& action) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      action();
      return true;
    } catch (const std::exception& e) {
      if (attempt == 0) {
        spdlog::warn("{} failed for {}: {}; retrying", what, msg_id, e.what());
      } else {
        spdlog::error("{} failed again for {}: {}; leaving it for the next poll", what, msg_id, e.what());
      }
    }
  }
  return false;
}

void escalate_on_malicious_url(Verdict& verdict, const UrlReport& urls) {
  for (const auto& f : urls.findings) {
    if (f.reputation != Reputation::Malicious) continue;
    if (!verdict.is_phishing) {
      verdict.is_phishing = true;
      verdict.risk = Risk::High;
      verdict.actions.insert(verdict.actions.begin(), "Do not interact with any links or buttons in the email");
      verdict.reason = "A link points to a domain with a malicious reputation. Model assessment: " + verdict.reason;
    }
    verdict.social_engineering_elements.push_back("Link to a domain with a malicious reputation: " +
                                                  f.registrable_domain);
  }
}

Disposition Gateway::classify_message(const std::string& msg_id, std::string_view raw) {
  Disposition result;
  std::optional<ClassificationOutcome> outcome;
  UrlReport url_report;
  bool have_urls = false;
  try {
    EmailRecord rec = record_from_eml(raw, "mailbox");
    rec.id = msg_id;
    const PreparedEmail prepared = prepare_email(rec, config_.pipeline);
    PromptOptions prompt = config_.prompt;
    if (prompt.max_email_chars == 0) prompt.max_email_chars = client_.config().context_chars;
    if (config_.url_analysis || config_.url_post_check) {
      url_report = analyze_email(prepared, config_.reputation.get(), config_.analyzer);
      if (config_.url_analysis) prompt.url_context = url_report.summary;
      have_urls = true;
    }
    outcome = client_.classify(build_request(prepared.record, prompt), msg_id);
  } catch (const Error& e) {
    ClassificationOutcome failed;
    failed.error = OutcomeError{e.code(), e.what()};
    outcome = std::move(failed);
  }

  if (outcome->error) {
    spdlog::warn("could not classify {}: {}: {}", msg_id, to_string(outcome->error->code), outcome->error->message);
    if (config_.fail_policy == FailPolicy::Closed) {
      result.kind = DispositionKind::Deferred;
      return result;
    }
    result.kind = with_retry("mark_processed", msg_id, [&] { mailbox_.mark_processed(msg_id, "unscanned"); })
                      ? DispositionKind::DeliveredUnscanned
                      : DispositionKind::Deferred;
    return result;
  }

  result.verdict = outcome->verdict;
  if (!result.verdict->is_phishing && config_.url_post_check) escalate_on_malicious_url(*result.verdict, url_report);
  if (!result.verdict->is_phishing) {
    result.kind = with_retry("mark_processed", msg_id, [&] { mailbox_.mark_processed(msg_id, "clean"); })
                      ? DispositionKind::DeliveredClean
                      : DispositionKind::Deferred;
    return result;
  }

  result.report = generate_user_report(*result.verdict, have_urls ? &url_report : nullptr, config_.report_budget);
  // The report goes out first so a failed move leaves nothing half-done.
  const bool done = with_retry("deliver_report", msg_id, [&] { mailbox_.deliver_report(msg_id, *result.report); }) &&
                    with_retry("move_to_spam", msg_id, [&] { mailbox_.move_to_spam(msg_id); }) &&
                    with_retry("mark_processed", msg_id, [&] { mailbox_.mark_processed(msg_id, "spam"); });
  result.kind = done ? DispositionKind::MovedToSpam : DispositionKind::Deferred;
  return result;
}

Disposition Gateway::process_incoming(const std::string& msg_id, std::string_view raw) {
  std::string sender;
  try {
    const RawEmail msg = parse_eml(raw);
    if (const auto from = msg.header("From")) sender = decode_header_words(*from);
  } catch (const Error&) {
    // Unparseable mail is simply untrusted.
  }
  Disposition d;
  if (filter_trusted(sender, config_.whitelist)) {
    d.kind = with_retry("mark_processed", msg_id, [&] { mailbox_.mark_processed(msg_id, "trusted"); })
                 ? DispositionKind::DeliveredTrusted
                 : DispositionKind::Deferred;
  } else {
    d = classify_message(msg_id, raw);
  }
  spdlog::info("{}: {}", msg_id, to_string(d.kind));
  return d;
}

std::vector<std::pair<std::string, Disposition>> Gateway::poll_once() {
  std::vector<IncomingMessage> messages;
  try {
    messages = mailbox_.poll_new(config_.batch_size);
  } catch (const std::exception& e) {
    spdlog::error("mailbox poll failed: {}", e.what());
    return {};
  }
  std::vector<std::pair<std::string, Disposition>> out;
  out.reserve(messages.size());
  for (const auto& msg : messages) out.emplace_back(msg.id, process_incoming(msg.id, msg.raw));
  return out;
}

void Gateway::run(std::stop_token stop) {
  std::mutex m;
  std::condition_variable_any cv;
  while (!stop.stop_requested()) {
    poll_once();
    std::unique_lock lock(m);
    cv.wait_for(lock, stop, config_.poll_interval, [] { return false; });
  }
}

}  // namespace phishtriage
