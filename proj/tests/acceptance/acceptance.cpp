// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mock_llm_server.hpp"
#include "phishtriage/corpus_io.hpp"
#include "phishtriage/dataset.hpp"
#include "phishtriage/encoding.hpp"
#include "phishtriage/gateway.hpp"
#include "phishtriage/llm_client.hpp"
#include "phishtriage/maildir.hpp"
#include "phishtriage/metrics.hpp"
#include "phishtriage/mime.hpp"
#include "phishtriage/pipeline.hpp"
#include "phishtriage/report.hpp"
#include "phishtriage/reputation.hpp"
#include "phishtriage/response_cache.hpp"
#include "phishtriage/text_cleaner.hpp"
#include "phishtriage/url_analyzer.hpp"
#include "properties.hpp"
#include "test_paths.hpp"

namespace fs = std::filesystem;
using namespace phishtriage;
using testing::MockLlmServer;
using testing::TempDir;
using testing::read_fixture;

namespace {

using Clock = std::chrono::steady_clock;

/// Collects failed checks and detail lines for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& line) { notes_.push_back(line); }

  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

ModelConfig mock_model(const std::string& base_url) {
  ModelConfig cfg;
  cfg.name = "mock-model";
  cfg.base_url = base_url;
  cfg.rate_limit = 60000;
  cfg.timeout = std::chrono::milliseconds(2000);
  cfg.max_retries = 1;
  cfg.backoff_base = std::chrono::milliseconds(2);
  cfg.backoff_cap = std::chrono::milliseconds(10);
  cfg.credential_env = "PHISHTRIAGE_ACCEPTANCE_UNSET_KEY";
  return cfg;
}

std::vector<ScoredOutcome> score(const std::vector<UniformRecord>& records, const BatchResult& result) {
  std::vector<ScoredOutcome> scored;
  for (std::size_t i = 0; i < records.size(); ++i) {
    // Through the outcomes-file representation, as the eval verb reads it.
    const LabeledOutcome lo = outcome_from_json(outcome_to_json(result.outcomes[i], records[i].label));
    scored.push_back({lo.truth, lo.outcome.verdict});
  }
  return scored;
}

// ---------------------------------------------------------------------------

struct Row {
  const char* model;
  ConfusionCounts counts;
  double precision, recall, f1, accuracy;  // as printed in the comparison table
};

const Row kTable[] = {
    {"Llama-3.1-70b", {4806, 93, 1869, 98}, 0.9810, 0.9800, 0.9805, 0.9721},
    {"Gemma2-9b", {4882, 301, 1661, 22}, 0.9419, 0.9955, 0.9679, 0.9529},
    {"Llama3-8b", {4863, 760, 1202, 41}, 0.8648, 0.9916, 0.8833, 0.9239},
    {"Mistral-large-latest", {4899, 1337, 625, 5}, 0.7855, 0.9989, 0.8045, 0.8795},
};

void table_metrics(Check& c) {
  const auto start = Clock::now();
  constexpr double kTol = 1e-4;

  std::vector<ModelResult> results;
  for (const Row& row : kTable) {
    const Metrics m = compute_metrics(row.counts);
    const std::string name = row.model;
    for (const auto& [metric, stated, value] :
         {std::tuple{"precision", row.precision, *m.precision}, std::tuple{"recall", row.recall, *m.recall}}) {
      const double diff = std::fabs(value - stated);
      c.note(name + " " + metric + ": recomputed " + fmt("%.7f", value) + ", stated " + fmt("%.4f", stated) +
             ", diff " + fmt("%.7f", diff));
      c.expect(diff <= kTol, name + " " + metric + " off by " + fmt("%.7f", diff));
    }
    const double acc = double(row.counts.tp + row.counts.tn) / double(row.counts.total());
    const double f1 = 2.0 * row.counts.tp / double(2 * row.counts.tp + row.counts.fp + row.counts.fn);
    if (name == "Llama-3.1-70b" || name == "Gemma2-9b") {
      c.expect(std::fabs(*m.f1 - row.f1) <= kTol, name + " f1 " + fmt("%.6f", *m.f1));
      c.expect(std::fabs(*m.accuracy - row.accuracy) <= kTol, name + " accuracy " + fmt("%.6f", *m.accuracy));
    } else {
      c.expect(*m.accuracy == acc && *m.f1 == f1, name + " accuracy/f1 differ from the closed forms");
      c.note(name + ": accuracy " + format_metric(m.accuracy) + ", f1 " + format_metric(m.f1) +
             " (stated f1 " + fmt("%.4f", row.f1) + ", accuracy " + fmt("%.4f", row.accuracy) + ")");
    }
    results.push_back({row.model, row.counts, 0, std::nullopt,
                       StatedMetrics{row.precision, row.recall, row.f1, row.accuracy}});
  }
  c.expect(format_metric(compute_metrics(kTable[2].counts).accuracy) == "0.8833" &&
               format_metric(compute_metrics(kTable[2].counts).f1) == "0.9239",
           "Llama3-8b accuracy/f1 not 0.8833/0.9239");
  c.expect(format_metric(compute_metrics(kTable[3].counts).accuracy) == "0.8045" &&
               format_metric(compute_metrics(kTable[3].counts).f1) == "0.8795",
           "Mistral accuracy/f1 not 0.8045/0.8795");

  const ReportArtifacts art = render_report(results);
  std::set<std::string> flagged;
  for (const auto& d : art.discrepancies) flagged.insert(d.model + ":" + d.metric);
  const std::set<std::string> expected{"Llama3-8b:f1", "Llama3-8b:accuracy", "Mistral-large-latest:f1",
                                       "Mistral-large-latest:accuracy"};
  c.expect(flagged == expected, "report flags " + std::to_string(flagged.size()) + " discrepancies, expected 4");
  c.expect(art.text.find("Stated metrics that disagree") != std::string::npos, "report text lacks the flag section");
  std::istringstream lines(art.text);
  for (std::string line; std::getline(lines, line);) c.note("  | " + line);

  const double elapsed = ms_since(start);
  c.note("runtime " + fmt("%.2f", elapsed) + " ms");
  c.expect(elapsed < 1000.0, "took " + fmt("%.1f", elapsed) + " ms");
}

void fpr(Check& c) {
  const double llama = *compute_metrics({4806, 93, 1869, 98}).fpr;
  const double gemma = *compute_metrics({4882, 301, 1661, 22}).fpr;
  c.note("Llama-3.1-70b fpr " + fmt("%.6f", llama) + ", Gemma2-9b fpr " + fmt("%.6f", gemma));
  c.expect(std::fabs(llama - 0.0474) <= 0.001, "Llama-3.1-70b fpr " + fmt("%.6f", llama));
  c.expect(std::fabs(gemma - 0.1534) <= 0.001, "Gemma2-9b fpr " + fmt("%.6f", gemma));
  c.expect(std::fabs(llama - 93.0 / 1962.0) < 1e-15 && std::fabs(gemma - 301.0 / 1962.0) < 1e-15,
           "fpr is not fp/(fp+tn)");
}

void mock_end_to_end(Check& c) {
  MockLlmServer server;
  server.load_fixture(nlohmann::json::parse(read_fixture("planted_mock.json")));
  const auto records = read_corpus(testing::fixture_path("planted_corpus.jsonl"));
  c.expect(records.size() == 100, "corpus has " + std::to_string(records.size()) + " records");

  const LlmClient client(mock_model(server.base_url()));
  BatchOptions options;
  options.parallelism = 4;
  const BatchResult result = classify_batch(records, client, options);
  const CountResult counts = confusion_counts(score(records, result));
  const ConfusionCounts planted{41, 7, 45, 7};
  c.note("counts tp " + std::to_string(counts.counts.tp) + " fp " + std::to_string(counts.counts.fp) + " tn " +
         std::to_string(counts.counts.tn) + " fn " + std::to_string(counts.counts.fn) + ", unscored " +
         std::to_string(counts.unscored));
  c.expect(counts.counts == planted && counts.unscored == 0, "confusion matrix differs from the planted one");

  const Metrics m = compute_metrics(counts.counts);
  c.expect(*m.accuracy == 86.0 / 100.0, "accuracy");
  c.expect(*m.precision == 41.0 / 48.0, "precision");
  c.expect(*m.recall == 41.0 / 48.0, "recall");
  c.expect(*m.f1 == 82.0 / 96.0, "f1");
  c.expect(*m.fpr == 7.0 / 52.0, "fpr");
  c.note("accuracy " + format_metric(m.accuracy) + ", precision " + format_metric(m.precision) + ", recall " +
         format_metric(m.recall) + ", f1 " + format_metric(m.f1));
  c.expect(server.calls() == 100, "mock saw " + std::to_string(server.calls()) + " calls");
}

void property_suite(Check& c) {
  const auto start = Clock::now();
  for (const auto& r : testing::run_all_properties()) {
    c.note(r.name + ": " + std::to_string(r.cases) + " cases, " + (r.ok() ? "ok" : *r.failure));
    c.expect(r.ok(), r.name);
  }

  // Length window boundaries.
  std::vector<UniformRecord> records;
  for (std::size_t len : {499u, 500u, 2000u, 2001u}) {
    EmailRecord rec;
    rec.subject = "s";
    rec.sender = "f";
    rec.label = Label::Legit;
    const std::string body(len, static_cast<char>('a' + len % 26));
    records.push_back(normalize_record(rec, body));
  }
  FilterDiagnostics diag;
  const Corpus kept = filter_corpus(records, {}, &diag);
  std::vector<std::size_t> lengths;
  for (const auto& r : kept.records) lengths.push_back(body_length(r));
  c.expect(lengths == std::vector<std::size_t>{500, 2000} && diag.dropped_length == 2,
           "length window is not [500, 2000] inclusive");

  // Base64 fixtures: valid payload decodes, invalid payload becomes a null body.
  c.expect(base64_decode("SGVsbG8sIHdvcmxk") == std::optional<std::string>("Hello, world"), "base64 fixture");
  c.expect(!base64_decode("%%%not base64%%%"), "invalid base64 accepted");
  const EmailRecord broken = record_from_eml(
      "From: a@b.example\r\nSubject: x\r\nContent-Type: text/plain\r\nContent-Transfer-Encoding: base64\r\n\r\n"
      "@@@@ this is not base64 @@@@\r\n",
      "fixture");
  c.expect(broken.null_body && !broken.body_text && !broken.body_html, "invalid base64 body is not null");

  const double elapsed = ms_since(start);
  c.note("suite runtime " + fmt("%.1f", elapsed / 1000.0) + " s");
  c.expect(elapsed < 60000.0, "suite took " + fmt("%.1f", elapsed / 1000.0) + " s");
}

void reliability(Check& c) {
  const auto v = [](bool phishing, Risk risk) {
    Verdict verdict;
    verdict.is_phishing = phishing;
    verdict.risk = risk;
    return verdict;
  };
  const std::vector<ScoredOutcome> all_correct{{Label::Phishing, v(true, Risk::High)},
                                               {Label::Legit, v(false, Risk::Low)}};
  const std::vector<ScoredOutcome> medium_miss{{Label::Phishing, v(true, Risk::High)},
                                               {Label::Phishing, v(false, Risk::Medium)}};
  const std::vector<ScoredOutcome> zero_miss{{Label::Phishing, v(true, Risk::High)},
                                             {Label::Legit, v(true, Risk::High)}};
  const double a = reliability_score(all_correct).score;
  const double b = reliability_score(medium_miss).score;
  const double d = reliability_score(zero_miss).score;
  c.note("all correct " + fmt("%.2f", a) + ", medium miss " + fmt("%.2f", b) + ", zero-mark miss " + fmt("%.2f", d));
  c.expect(a == 1.0, "all correct");
  c.expect(b == 0.75, "medium-risk miss");
  c.expect(d == 0.5, "zero-mark miss");
  const auto mono = testing::reliability_monotonic_property(1000, 99);
  c.note(mono.name + ": " + (mono.ok() ? "ok" : *mono.failure));
  c.expect(mono.ok(), "monotonicity");
}

void drop_into(const fs::path& inbox, const std::string& id, const std::string& raw) {
  const fs::path tmp = inbox / (id + ".part");
  std::ofstream(tmp, std::ios::binary) << raw;
  fs::rename(tmp, inbox / (id + ".eml"));
}

bool wait_for(const std::function<bool()>& done, std::chrono::milliseconds limit) {
  const auto deadline = Clock::now() + limit;
  while (Clock::now() < deadline) {
    if (done()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return done();
}

void gateway(Check& c) {
  const std::chrono::milliseconds interval(300);
  {
    MockLlmServer server;
    server.load_fixture(nlohmann::json::parse(read_fixture("mock_fixture.json")));
    const LlmClient client(mock_model(server.base_url()));
    TempDir dir;
    MaildirAdapter mailbox(dir.path());
    GatewayConfig cfg;
    cfg.whitelist = Whitelist::parse(read_fixture("whitelist.txt"));
    cfg.poll_interval = interval;
    Gateway gw(cfg, mailbox, client);
    std::jthread worker([&](std::stop_token stop) { gw.run(stop); });
    std::this_thread::sleep_for(interval / 3);

    const auto dropped = Clock::now();
    drop_into(mailbox.inbox(), "spoof", read_fixture("facebook_spoof.eml"));
    const bool moved = wait_for(
        [&] { return fs::exists(mailbox.spam() / "spoof.eml") && fs::exists(mailbox.reports() / "spoof.txt"); },
        2 * interval);
    const double took = ms_since(dropped);
    c.note("spoof reached spam/ and reports/ after " + fmt("%.0f", took) + " ms (interval " +
           std::to_string(interval.count()) + " ms)");
    c.expect(moved, "spoof not in spam/ with a report within two poll intervals");
    if (moved) {
      std::ifstream in(mailbox.reports() / "spoof.txt");
      const std::string report{std::istreambuf_iterator<char>(in), {}};
      c.expect(report.find("Do not interact with any links") != std::string::npos, "report lacks the action list");
    }

    const std::size_t before = server.calls();
    drop_into(mailbox.inbox(), "hr", read_fixture("trusted_sender.eml"));
    const bool passed = wait_for([&] { return mailbox.is_processed("hr"); }, 2 * interval);
    c.expect(passed && fs::exists(mailbox.inbox() / "hr.eml"), "whitelisted message not delivered");
    c.note("LLM calls for the whitelisted message: " + std::to_string(server.calls() - before));
    c.expect(server.calls() == before, "whitelisted message reached the model");
    worker.request_stop();
  }
  {
    const LlmClient client(mock_model(testing::unreachable_base_url()));
    TempDir dir;
    MaildirAdapter mailbox(dir.path());
    GatewayConfig cfg;
    cfg.poll_interval = interval;
    Gateway gw(cfg, mailbox, client);
    drop_into(mailbox.inbox(), "down", read_fixture("facebook_spoof.eml"));
    const auto results = gw.poll_once();
    const bool unscanned = results.size() == 1 && results[0].second.kind == DispositionKind::DeliveredUnscanned;
    c.note(std::string("endpoint down: ") +
           (results.empty() ? "nothing processed" : std::string(to_string(results[0].second.kind))));
    c.expect(unscanned, "endpoint down did not deliver unscanned");
    c.expect(fs::exists(mailbox.inbox() / "down.eml") && mailbox.is_processed("down"), "message lost");
  }
}

UrlReport scan(const std::string& fixture, ReputationClient* reputation) {
  const EmailRecord rec = record_from_eml(read_fixture(fixture), fixture);
  const PreparedEmail prepared = prepare_email(rec);
  return analyze_email(prepared, reputation);
}

const UrlFinding* find_domain(const UrlReport& report, const std::string& domain) {
  for (const auto& f : report.findings) {
    if (f.registrable_domain == domain) return &f;
  }
  return nullptr;
}

void url_analyzer(Check& c) {
  const UrlReport spear = scan("spear_phishing.eml", nullptr);
  const UrlFinding* bitly = find_domain(spear, "bit.ly");
  c.expect(bitly && bitly->is_shortened, "bit.ly link not flagged shortened");

  StubReputationClient stub({}, StubReputationClient::parse_domain_list(read_fixture("denylist.txt")));
  const UrlReport spoof = scan("facebook_spoof.eml", &stub);
  const UrlFinding* tracker = find_domain(spoof, "thema214.com");
  c.expect(tracker && tracker->brand_mismatch && tracker->brand_mismatch->expected_domain == "facebook.com",
           "thema214.com not flagged as a Facebook brand mismatch");
  c.expect(tracker && tracker->reputation == Reputation::Malicious, "denylisted domain not Malicious");

  const UrlReport legit = scan("legit_newsletter.eml", nullptr);
  const UrlFinding* fb = find_domain(legit, "facebook.com");
  c.expect(fb && !fb->brand_mismatch, "facebook.com link flagged");

  HttpReputationClient broken(testing::unreachable_base_url(), "k", {}, nullptr, std::chrono::milliseconds(500));
  const UrlReport degraded = scan("facebook_spoof.eml", &broken);
  bool all_unknown = !degraded.findings.empty();
  for (const auto& f : degraded.findings) all_unknown = all_unknown && f.reputation == Reputation::Unknown;
  c.expect(all_unknown && degraded.reputation_failures == degraded.findings.size(),
           "provider failure did not degrade to Unknown");
  c.expect(spoof.hidden_text_removals == 1, "hidden span not counted");
  c.note(spoof.summary.empty() ? "no summary" : "summary: " + spoof.summary.substr(0, spoof.summary.find('\n')));
  c.note("provider down: " + std::to_string(degraded.reputation_failures) + " lookups degraded to Unknown");
}

void client_discipline(Check& c) {
  MockLlmServer server;
  testing::MockReply slow;
  slow.delay_ms = 40;
  slow.verdict = testing::make_verdict(false);
  server.set_default(slow);
  std::vector<UniformRecord> records;
  for (int i = 0; i < 30; ++i) {
    UniformRecord r;
    r.id = "d" + std::to_string(i);
    r.email_text = "SUBJECT: s" + std::to_string(i) + ", FROM: f, EMAIL: body " + std::to_string(i);
    r.label = Label::Legit;
    records.push_back(r);
  }
  TempDir dir;
  ResponseCache cache(dir / "cache");
  const LlmClient client(mock_model(server.base_url()));
  BatchOptions options;
  options.parallelism = 3;
  options.cache = &cache;
  const BatchResult first = classify_batch(records, client, options);
  c.note("first run: " + std::to_string(server.calls()) + " calls, peak in flight " +
         std::to_string(server.max_in_flight()) + " (bound 3)");
  c.expect(server.max_in_flight() <= 3, "in-flight bound exceeded");
  c.expect(server.max_in_flight() >= 2, "requests never overlapped; the bound was not exercised");
  c.expect(server.calls() == records.size(), "first run call count");

  server.reset_counters();
  const LlmClient rerun_client(mock_model(server.base_url()));
  const BatchResult second = classify_batch(records, rerun_client, options);
  c.note("cached rerun: " + std::to_string(server.calls()) + " calls, " + std::to_string(second.cache_hits) +
         " cache hits");
  c.expect(server.calls() == 0 && rerun_client.network_calls() == 0, "cached rerun made network calls");
  c.expect(second.cache_hits == records.size(), "not every record came from the cache");
  bool same = true;
  for (std::size_t i = 0; i < records.size(); ++i) same = same && first.outcomes[i].verdict == second.outcomes[i].verdict;
  c.expect(same, "cached verdicts differ");
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::off);
  const std::vector<std::pair<const char*, void (*)(Check&)>> criteria{
      {"comparison-table metrics and discrepancy flags", table_metrics},
      {"false-positive rates", fpr},
      {"mock end-to-end planted confusion matrix", mock_end_to_end},
      {"pipeline property suite", property_suite},
      {"reliability rule", reliability},
      {"mailbox gateway end-to-end", gateway},
      {"URL analyzer", url_analyzer},
      {"client concurrency bound and cache", client_discipline},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check check;
    try {
      criteria[i].second(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = check.failures().empty();
    failed += !ok;
    for (const auto& n : check.notes()) std::cout << "    " << n << "\n";
    std::cout << (ok ? "PASS " : "FAIL ") << (i + 1) << ": " << criteria[i].first;
    for (const auto& f : check.failures()) std::cout << " [" << f << "]";
    std::cout << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
