#include "cli/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "phishtriage/config.hpp"
#include "phishtriage/corpus_io.hpp"
#include "phishtriage/csv.hpp"
#include "phishtriage/dataset.hpp"
#include "phishtriage/error.hpp"
#include "phishtriage/fs_util.hpp"
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

namespace phishtriage::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kConfigEnv = "PHISHTRIAGE_CONFIG";
constexpr const char* kBaseUrlEnv = "PHISHTRIAGE_BASE_URL";
constexpr const char* kReputationKeyEnv = "PHISHTRIAGE_REPUTATION_KEY";

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted.store(true); }

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

void emit_error(std::ostream& err, std::string_view code, const std::string& message) {
  err << json{{"level", "error"}, {"code", code}, {"message", message}}.dump(-1, ' ', false,
                                                                             json::error_handler_t::replace)
      << "\n";
}

void configure_logging(bool verbose) {
  static const auto logger = [] {
    auto l = std::make_shared<spdlog::logger>("phishtriage", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("%Y-%m-%dT%H:%M:%S.%e %l %v");
    spdlog::set_default_logger(l);
    return l;
  }();
  logger->set_level(verbose ? spdlog::level::info : spdlog::level::warn);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Options shared by verbs that talk to a model endpoint.
struct ModelFlags {
  std::optional<std::string> model;
  std::optional<std::string> endpoint;
  std::optional<std::string> structured_mode;
  std::optional<double> rate_limit;
  std::optional<long long> timeout_ms;
  std::optional<int> max_retries;
  std::optional<std::size_t> context_chars;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "Model name sent to the endpoint");
    app->add_option("--endpoint", endpoint, "Base URL of an OpenAI-compatible API (.../v1)");
    app->add_option("--structured-mode", structured_mode, "response_format, tool_call or prompt_only")
        ->check(CLI::IsMember({"response_format", "tool_call", "prompt_only"}));
    app->add_option("--rate-limit", rate_limit, "Requests per minute")->check(CLI::PositiveNumber);
    app->add_option("--timeout-ms", timeout_ms, "Per-request timeout")->check(CLI::PositiveNumber);
    app->add_option("--max-retries", max_retries, "Retries after the first attempt")->check(CLI::NonNegativeNumber);
    app->add_option("--context-chars", context_chars, "Email budget in code points");
  }
};

struct Context {
  std::optional<std::string> config_path;
  bool verbose = false;

  KeyValueConfig load_config() const {
    const auto path = config_path ? config_path : env(kConfigEnv);
    return path ? KeyValueConfig::load(*path) : KeyValueConfig{};
  }
};

// flags > environment > config file
ModelConfig resolve_model(const KeyValueConfig& file, const ModelFlags& flags) {
  ModelConfig cfg = model_config_from(file);
  if (auto v = env(kBaseUrlEnv)) cfg.base_url = *v;
  if (env(cfg.credential_env.c_str())) cfg.api_key.reset();
  if (flags.model) cfg.name = *flags.model;
  if (flags.endpoint) cfg.base_url = *flags.endpoint;
  if (flags.structured_mode) cfg.structured_mode = *structured_mode_from_string(*flags.structured_mode);
  if (flags.rate_limit) cfg.rate_limit = *flags.rate_limit;
  if (flags.timeout_ms) cfg.timeout = std::chrono::milliseconds(*flags.timeout_ms);
  if (flags.max_retries) cfg.max_retries = *flags.max_retries;
  if (flags.context_chars) cfg.context_chars = *flags.context_chars;
  cfg.validate();
  return cfg;
}

PromptOptions resolve_prompt(const KeyValueConfig& file, const std::optional<std::string>& persona_flag,
                             const ModelConfig& model) {
  PromptOptions prompt;
  const auto persona = persona_flag ? persona_flag : file.get("persona_file");
  if (persona) prompt.persona = read_file(*persona);
  prompt.mode = model.structured_mode;
  prompt.max_email_chars = model.context_chars;
  return prompt;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string format = "auto";
  ColumnMapping columns;
  std::optional<std::string> synonyms;
  std::optional<std::string> label;
  std::string source;
  std::string out;
};

void collect_eml(const fs::path& path, std::vector<fs::path>& files) {
  if (fs::is_directory(path)) {
    std::vector<fs::path> found;
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".eml") found.push_back(entry.path());
    }
    std::sort(found.begin(), found.end());
    files.insert(files.end(), found.begin(), found.end());
  } else {
    files.push_back(path);
  }
}

int run_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  LabelSynonyms synonyms = a.synonyms ? LabelSynonyms::parse(read_file(*a.synonyms)) : LabelSynonyms::defaults();
  std::optional<Label> eml_label;
  if (a.label) {
    eml_label = synonyms.lookup(*a.label);
    if (!eml_label) throw Error(ErrorCode::UnknownLabel, "unknown label '" + *a.label + "'");
  }

  std::vector<UniformRecord> records;
  std::size_t row_failures = 0;
  std::size_t null_bodies = 0;
  const auto add = [&](const EmailRecord& rec) {
    PreparedEmail prepared = prepare_email(rec);
    if (prepared.null_body) ++null_bodies;
    records.push_back(std::move(prepared.record));
  };

  for (const auto& input : a.inputs) {
    const fs::path path(input);
    std::string ext = lower(path.extension().string());
    std::string format = a.format;
    if (format == "auto") {
      if (fs::is_directory(path) || ext == ".eml") format = "eml";
      else if (ext == ".json") format = "json";
      else format = "csv";
    }
    const std::string source = a.source.empty() ? path.filename().string() : a.source;
    if (format == "eml") {
      std::vector<fs::path> files;
      collect_eml(path, files);
      for (const auto& file : files) {
        EmailRecord rec = record_from_eml(read_file(file), source);
        rec.label = eml_label;
        add(rec);
      }
      continue;
    }
    if (!a.columns.body) throw Error(ErrorCode::InvalidConfig, "--body-col is required for tabular input");
    const DatasetLoad load = load_tabular_dataset(
        path, format == "json" ? TabularFormat::Json : TabularFormat::Csv, a.columns, synonyms, source);
    for (const auto& failure : load.failures) {
      err << json{{"level", "warning"},
                  {"code", "RowParse"},
                  {"file", input},
                  {"row", failure.row},
                  {"message", failure.message}}
                 .dump(-1, ' ', false, json::error_handler_t::replace)
          << "\n";
    }
    row_failures += load.failures.size();
    for (const auto& rec : load.records) add(rec);
  }

  const bool as_csv = lower(fs::path(a.out).extension().string()) == ".csv";
  write_file_atomic(a.out, as_csv ? write_corpus_csv(records) : write_corpus_jsonl(records));
  const CorpusStats stats = count_labels(records);
  out << "ingested " << records.size() << " records (phishing " << stats.phishing << ", legit " << stats.legit
      << ", unlabeled " << stats.unlabeled << ", null bodies " << null_bodies << ", rejected rows " << row_failures
      << ") -> " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- clean

struct CleanArgs {
  std::string corpus;
  std::optional<std::string> out;
  std::size_t min_len = 500;
  std::size_t max_len = 2000;
};

int run_clean(const CleanArgs& a, std::ostream& out) {
  if (a.min_len > a.max_len) throw Error(ErrorCode::InvalidConfig, "--min-len exceeds --max-len");
  FilterDiagnostics diag;
  const Corpus corpus = filter_corpus(read_corpus(a.corpus), FilterOptions{a.min_len, a.max_len}, &diag);
  if (a.out) {
    const bool as_csv = lower(fs::path(*a.out).extension().string()) == ".csv";
    write_file_atomic(*a.out, as_csv ? write_corpus_csv(corpus.records) : write_corpus_jsonl(corpus.records));
  }
  out << format_summary(corpus_stats(corpus));
  out << "dropped: null " << diag.dropped_null << ", duplicate " << diag.dropped_duplicate << ", length "
      << diag.dropped_length << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
  std::string corpus;
  std::string out;
  ModelFlags model;
  std::optional<std::size_t> parallelism;
  std::optional<std::string> cache_dir;
  std::optional<std::string> persona;
};

int run_classify(const ClassifyArgs& a, const Context& ctx, std::ostream& out) {
  const KeyValueConfig file = ctx.load_config();
  const ModelConfig model = resolve_model(file, a.model);
  const auto records = read_corpus(a.corpus);

  BatchOptions batch;
  batch.prompt = resolve_prompt(file, a.persona, model);
  batch.parallelism = a.parallelism.value_or(static_cast<std::size_t>(file.get_int("parallelism").value_or(4)));
  std::optional<ResponseCache> cache;
  if (const auto dir = a.cache_dir ? a.cache_dir : file.get("cache_dir")) {
    cache.emplace(*dir);
    batch.cache = &*cache;
  }

  const LlmClient client(model);
  const BatchResult result = classify_batch(records, client, batch);

  std::string lines;
  for (std::size_t i = 0; i < records.size(); ++i) {
    lines += outcome_to_json(result.outcomes[i], records[i].label).dump(-1, ' ', false, json::error_handler_t::replace);
    lines += '\n';
  }
  write_file_atomic(a.out, lines);

  const std::size_t failed = std::accumulate(result.error_counts.begin(), result.error_counts.end(), std::size_t{0},
                                             [](std::size_t acc, const auto& kv) { return acc + kv.second; });
  out << "classified " << records.size() - failed << "/" << records.size() << " records with " << model.name
      << " (cache hits " << result.cache_hits << ", network calls " << client.network_calls() << ")";
  for (const auto& [code, count] : result.error_counts) out << "; " << code << " " << count;
  out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval / compare

struct EvalRun {
  std::string model;
  CountResult counts;
  std::optional<ReliabilityResult> reliability;
};

EvalRun evaluate_outcomes(const fs::path& path, const std::optional<std::string>& corpus_path) {
  std::map<std::string, Label> truth_by_id;
  if (corpus_path) {
    for (const auto& rec : read_corpus(*corpus_path)) {
      if (rec.label) truth_by_id.emplace(rec.id, *rec.label);
    }
  }
  std::vector<ScoredOutcome> scored;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      throw Error(ErrorCode::MalformedPayload, path.string() + ":" + std::to_string(line_no) + ": not JSON");
    }
    LabeledOutcome lo = outcome_from_json(doc);
    if (!lo.truth) {
      if (const auto it = truth_by_id.find(lo.outcome.record_id); it != truth_by_id.end()) lo.truth = it->second;
    }
    if (!lo.truth) throw Error(ErrorCode::MissingLabel, "record " + lo.outcome.record_id + " has no ground truth");
    scored.push_back({lo.truth, lo.outcome.verdict});
  }
  EvalRun run;
  run.model = path.stem().string();
  run.counts = confusion_counts(scored);
  if (run.counts.counts.total() > 0) run.reliability = reliability_score(scored);
  return run;
}

void write_outputs(const ReportArtifacts& art, const std::optional<std::string>& csv_out,
                   const std::optional<std::string>& json_out, const std::optional<std::string>& text_out,
                   std::ostream& out) {
  if (csv_out) write_file_atomic(*csv_out, art.csv);
  if (json_out) write_file_atomic(*json_out, art.json + "\n");
  if (text_out) write_file_atomic(*text_out, art.text + "\n" + art.confusion_matrices);
  out << art.text << "\n" << art.confusion_matrices;
}

struct EvalArgs {
  std::string predictions;
  std::optional<std::string> corpus;
  std::optional<std::string> model;
  std::optional<std::string> out;
  std::optional<std::string> json_out;
  std::optional<std::string> text_out;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  EvalRun run = evaluate_outcomes(a.predictions, a.corpus);
  if (a.model) run.model = *a.model;
  if (run.counts.counts.total() == 0) throw Error(ErrorCode::EmptyCounts, "no scored outcomes in " + a.predictions);
  ModelResult result{run.model, run.counts.counts, run.counts.unscored, run.reliability, std::nullopt};
  write_outputs(render_report({result}), a.out, a.json_out, a.text_out, out);
  return kExitOk;
}

struct CompareArgs {
  std::vector<std::string> runs;
  std::optional<std::string> counts;
  std::optional<std::string> corpus;
  std::optional<std::string> out;
  std::optional<std::string> json_out;
  std::optional<std::string> text_out;
  double tolerance = 5e-4;
};

std::vector<ModelResult> parse_counts_table(const std::string& path) {
  const auto rows = csv::parse(read_file(path));
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, path + " is empty");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col[lower(rows[0][i])] = i;
  for (const char* required : {"model", "tp", "fp", "tn", "fn"}) {
    if (!col.contains(required)) throw Error(ErrorCode::UnknownColumn, path + " lacks column '" + required + "'");
  }
  std::vector<ModelResult> results;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;
    const auto cell = [&](const char* name) -> std::optional<std::string> {
      const auto it = col.find(name);
      if (it == col.end() || it->second >= row.size() || row[it->second].empty()) return std::nullopt;
      return row[it->second];
    };
    const auto count = [&](const char* name) -> std::size_t {
      const auto v = cell(name);
      try {
        std::size_t used = 0;
        const long long n = v ? std::stoll(*v, &used) : -1;
        if (n < 0 || used != v->size()) throw std::invalid_argument("negative");
        return static_cast<std::size_t>(n);
      } catch (const std::exception&) {
        throw Error(ErrorCode::RowParse, path + " row " + std::to_string(r) + ": bad " + name);
      }
    };
    const auto stated = [&](const char* name) -> std::optional<double> {
      const auto v = cell(name);
      if (!v) return std::nullopt;
      try {
        return std::stod(*v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::RowParse, path + " row " + std::to_string(r) + ": bad " + name);
      }
    };
    ModelResult m;
    m.model = cell("model").value_or("model" + std::to_string(r));
    m.counts = {count("tp"), count("fp"), count("tn"), count("fn")};
    StatedMetrics s{stated("precision"), stated("recall"), stated("f1"), stated("accuracy")};
    if (s.precision || s.recall || s.f1 || s.accuracy) m.stated = s;
    results.push_back(std::move(m));
  }
  return results;
}

int run_compare(const CompareArgs& a, std::ostream& out) {
  if (a.runs.empty() && !a.counts) throw Error(ErrorCode::InvalidConfig, "give --run and/or --counts");
  std::vector<ModelResult> results;
  if (a.counts) results = parse_counts_table(*a.counts);
  for (const auto& entry : a.runs) {
    const auto eq = entry.find('=');
    const std::string path = eq == std::string::npos ? entry : entry.substr(eq + 1);
    EvalRun run = evaluate_outcomes(path, a.corpus);
    if (eq != std::string::npos) run.model = entry.substr(0, eq);
    results.push_back({run.model, run.counts.counts, run.counts.unscored, run.reliability, std::nullopt});
  }
  ReportOptions options;
  options.discrepancy_tolerance = a.tolerance;
  write_outputs(render_report(results, options), a.out, a.json_out, a.text_out, out);
  return kExitOk;
}

// ---------------------------------------------------------------- url-scan

struct ReputationFlags {
  std::optional<std::string> allowlist;
  std::optional<std::string> denylist;
  std::optional<std::string> provider_url;

  void attach(CLI::App* app) {
    app->add_option("--allowlist", allowlist, "Domains reported Clean (offline stub)");
    app->add_option("--denylist", denylist, "Domains reported Malicious (offline stub)");
    app->add_option("--reputation-url", provider_url,
                    std::string("Multi-engine scanner API base URL; key from ") + kReputationKeyEnv);
  }

  std::shared_ptr<ReputationClient> make(const KeyValueConfig& file) const {
    const auto provider = provider_url ? provider_url : file.get("reputation_url");
    const auto allow = allowlist ? allowlist : file.get("allowlist");
    const auto deny = denylist ? denylist : file.get("denylist");
    std::shared_ptr<ReputationClient> inner;
    if (provider) {
      const std::string key = env(kReputationKeyEnv).value_or(file.get("reputation_api_key").value_or(""));
      inner = std::make_shared<HttpReputationClient>(*provider, key);
    } else if (allow || deny) {
      inner = std::make_shared<StubReputationClient>(
          allow ? StubReputationClient::parse_domain_list(read_file(*allow)) : std::set<std::string>{},
          deny ? StubReputationClient::parse_domain_list(read_file(*deny)) : std::set<std::string>{});
    }
    return inner ? std::make_shared<CachingReputationClient>(inner) : nullptr;
  }
};

struct AnalyzerData {
  std::optional<BrandTable> brands;
  std::optional<ShortenerList> shorteners;

  AnalyzerOptions load(const KeyValueConfig& file, const std::optional<std::string>& brands_flag,
                       const std::optional<std::string>& shorteners_flag) {
    AnalyzerOptions opts;
    if (const auto p = brands_flag ? brands_flag : file.get("brands")) {
      brands = BrandTable::parse(read_file(*p));
      opts.brands = &*brands;
    }
    if (const auto p = shorteners_flag ? shorteners_flag : file.get("shorteners")) {
      shorteners = ShortenerList::parse(read_file(*p));
      opts.shorteners = &*shorteners;
    }
    return opts;
  }
};

struct UrlScanArgs {
  std::string eml;
  ReputationFlags reputation;
  std::optional<std::string> brands;
  std::optional<std::string> shorteners;
  std::optional<std::string> out;
};

int run_url_scan(const UrlScanArgs& a, const Context& ctx, std::ostream& out) {
  const KeyValueConfig file = ctx.load_config();
  AnalyzerData data;
  const AnalyzerOptions options = data.load(file, a.brands, a.shorteners);
  const auto client = a.reputation.make(file);

  const EmailRecord rec = record_from_eml(read_file(a.eml), fs::path(a.eml).filename().string());
  const PreparedEmail prepared = prepare_email(rec);
  const UrlReport report = analyze_email(prepared, client.get(), options);

  json doc = {{"id", prepared.record.id},
              {"hidden_text_removals", report.hidden_text_removals},
              {"reputation_failures", report.reputation_failures},
              {"findings", json::array()},
              {"summary", report.summary}};
  for (const auto& f : report.findings) {
    json entry = {{"url", f.url},
                  {"registrable_domain", f.registrable_domain},
                  {"is_shortened", f.is_shortened},
                  {"brand_mismatch", json()},
                  {"reputation", to_string(f.reputation)}};
    if (f.brand_mismatch) {
      entry["brand_mismatch"] = {{"brand", f.brand_mismatch->brand},
                                 {"expected_domain", f.brand_mismatch->expected_domain}};
    }
    doc["findings"].push_back(std::move(entry));
  }
  const std::string text = doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
  if (a.out) write_file_atomic(*a.out, text);
  out << text;
  return kExitOk;
}

// ---------------------------------------------------------------- watch

struct WatchArgs {
  std::optional<std::string> maildir;
  std::optional<std::string> whitelist;
  std::optional<long long> poll_ms;
  std::optional<std::size_t> batch_size;
  std::optional<std::string> fail_policy;
  bool url_analysis = false;
  bool url_post_check = false;
  std::optional<long long> max_polls;
  std::optional<std::string> persona;
  ModelFlags model;
  ReputationFlags reputation;
};

int run_watch(const WatchArgs& a, const Context& ctx, std::ostream& out) {
  const KeyValueConfig file = ctx.load_config();
  const ModelConfig model = resolve_model(file, a.model);
  const auto maildir = a.maildir ? a.maildir : file.get("maildir");
  if (!maildir) throw Error(ErrorCode::InvalidConfig, "no maildir given (--maildir or config key 'maildir')");

  GatewayConfig gw;
  if (const auto wl = a.whitelist ? a.whitelist : file.get("whitelist")) gw.whitelist = Whitelist::parse(read_file(*wl));
  gw.prompt = resolve_prompt(file, a.persona, model);
  gw.poll_interval = std::chrono::milliseconds(a.poll_ms.value_or(file.get_int("poll_interval_ms").value_or(5000)));
  gw.batch_size = a.batch_size.value_or(static_cast<std::size_t>(file.get_int("batch_size").value_or(32)));
  const std::string policy = lower(a.fail_policy.value_or(file.get("fail_policy").value_or("open")));
  if (policy != "open" && policy != "closed") {
    throw Error(ErrorCode::InvalidConfig, "fail_policy must be 'open' or 'closed'");
  }
  gw.fail_policy = policy == "open" ? FailPolicy::Open : FailPolicy::Closed;
  gw.url_analysis = a.url_analysis || file.get_bool("url_analysis").value_or(false);
  gw.url_post_check = a.url_post_check || file.get_bool("url_post_check").value_or(false);
  gw.reputation = a.reputation.make(file);

  MaildirAdapter mailbox(*maildir);
  const LlmClient client(model);
  Gateway gateway(gw, mailbox, client);

  g_interrupted.store(false);
  const auto previous_int = std::signal(SIGINT, on_signal);
  const auto previous_term = std::signal(SIGTERM, on_signal);
  std::map<DispositionKind, std::size_t> tally;
  for (long long polls = 0; !g_interrupted.load();) {
    for (const auto& [id, d] : gateway.poll_once()) {
      ++tally[d.kind];
      out << id << "\t" << to_string(d.kind) << "\n" << std::flush;
    }
    if (a.max_polls && ++polls >= *a.max_polls) break;
    const auto until = std::chrono::steady_clock::now() + gw.poll_interval;
    while (!g_interrupted.load() && std::chrono::steady_clock::now() < until) {
      std::this_thread::sleep_for(std::min<std::chrono::steady_clock::duration>(
          std::chrono::milliseconds(50), until - std::chrono::steady_clock::now()));
    }
  }
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);

  out << "watch finished:";
  for (const auto& [kind, count] : tally) out << " " << to_string(kind) << "=" << count;
  out << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phishing email triage with LLM classifiers", "phishtriage"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  Context ctx;
  app.add_option("--config", ctx.config_path,
                 std::string("Key-value config file (default: $") + kConfigEnv + ")");
  app.add_flag("-v,--verbose", ctx.verbose, "Log progress to stderr");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Normalize datasets and .eml files into a corpus");
  ingest_cmd->add_option("--input", ingest.inputs, "CSV/JSON dataset, .eml file or directory of .eml")
      ->required()
      ->check(CLI::ExistingPath);
  ingest_cmd->add_option("--format", ingest.format, "auto, csv, json or eml")
      ->check(CLI::IsMember({"auto", "csv", "json", "eml"}));
  ingest_cmd->add_option("--id-col", ingest.columns.id, "Column holding a record id");
  ingest_cmd->add_option("--subject-col", ingest.columns.subject, "Column holding the subject");
  ingest_cmd->add_option("--sender-col", ingest.columns.sender, "Column holding the sender");
  ingest_cmd->add_option("--body-col", ingest.columns.body, "Column holding the body");
  ingest_cmd->add_option("--label-col", ingest.columns.label, "Column holding the label");
  ingest_cmd->add_option("--label-synonyms", ingest.synonyms, "Extra 'raw = Phishing|Legit' mappings");
  ingest_cmd->add_option("--label", ingest.label, "Label applied to .eml inputs");
  ingest_cmd->add_option("--source", ingest.source, "Source tag stored on each record");
  ingest_cmd->add_option("--out", ingest.out, "Output corpus (.csv or .jsonl)")->required();

  CleanArgs clean;
  auto* clean_cmd = app.add_subcommand("clean", "Filter a corpus and print its statistics");
  clean_cmd->add_option("--corpus", clean.corpus, "Corpus file")->required()->check(CLI::ExistingFile);
  clean_cmd->add_option("--out", clean.out, "Write the filtered corpus here");
  clean_cmd->add_option("--min-len", clean.min_len, "Minimum body length in code points");
  clean_cmd->add_option("--max-len", clean.max_len, "Maximum body length in code points");

  ClassifyArgs classify;
  auto* classify_cmd = app.add_subcommand("classify", "Classify a corpus with an LLM endpoint");
  classify_cmd->add_option("--corpus", classify.corpus, "Corpus file")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--out", classify.out, "Outcomes file (JSON lines)")->required();
  classify_cmd->add_option("--parallelism", classify.parallelism, "Requests in flight")->check(CLI::PositiveNumber);
  classify_cmd->add_option("--cache-dir", classify.cache_dir, "Response cache directory");
  classify_cmd->add_option("--persona", classify.persona, "System prompt file");
  classify.model.attach(classify_cmd);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score an outcomes file");
  eval_cmd->add_option("--predictions", eval.predictions, "Outcomes file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--corpus", eval.corpus, "Corpus supplying labels missing from the outcomes")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--model", eval.model, "Name shown in the report");
  eval_cmd->add_option("--out", eval.out, "CSV report");
  eval_cmd->add_option("--json-out", eval.json_out, "JSON report");
  eval_cmd->add_option("--text-out", eval.text_out, "Text report");

  CompareArgs compare;
  auto* compare_cmd = app.add_subcommand("compare", "Compare models side by side");
  compare_cmd->add_option("--run", compare.runs, "NAME=outcomes.jsonl (repeatable)");
  compare_cmd->add_option("--counts", compare.counts, "CSV of model,tp,fp,tn,fn[,precision,recall,f1,accuracy]")
      ->check(CLI::ExistingFile);
  compare_cmd->add_option("--corpus", compare.corpus, "Corpus supplying labels")->check(CLI::ExistingFile);
  compare_cmd->add_option("--tolerance", compare.tolerance, "Allowed gap between stated and recomputed metrics");
  compare_cmd->add_option("--out", compare.out, "CSV report");
  compare_cmd->add_option("--json-out", compare.json_out, "JSON report");
  compare_cmd->add_option("--text-out", compare.text_out, "Text report");

  UrlScanArgs url_scan;
  auto* url_cmd = app.add_subcommand("url-scan", "Report on the URLs of one .eml");
  url_cmd->add_option("--eml", url_scan.eml, "Message file")->required()->check(CLI::ExistingFile);
  url_cmd->add_option("--brands", url_scan.brands, "Brand table file");
  url_cmd->add_option("--shorteners", url_scan.shorteners, "Shortener domain list");
  url_cmd->add_option("--out", url_scan.out, "Also write the JSON report here");
  url_scan.reputation.attach(url_cmd);

  WatchArgs watch;
  auto* watch_cmd = app.add_subcommand("watch", "Run the mailbox gateway");
  watch_cmd->add_option("--maildir", watch.maildir, "Mailbox root with inbox/, spam/, reports/");
  watch_cmd->add_option("--whitelist", watch.whitelist, "Trusted senders file");
  watch_cmd->add_option("--poll-ms", watch.poll_ms, "Poll interval")->check(CLI::PositiveNumber);
  watch_cmd->add_option("--batch-size", watch.batch_size, "Messages per poll")->check(CLI::PositiveNumber);
  watch_cmd->add_option("--fail-policy", watch.fail_policy, "open or closed")
      ->check(CLI::IsMember({"open", "closed"}));
  watch_cmd->add_flag("--url-analysis", watch.url_analysis, "Add URL findings to the prompt and report");
  watch_cmd->add_flag("--url-post-check", watch.url_post_check, "Treat mail linking to a Malicious domain as phishing");
  watch_cmd->add_option("--max-polls", watch.max_polls, "Stop after this many polls")->check(CLI::PositiveNumber);
  watch_cmd->add_option("--persona", watch.persona, "System prompt file");
  watch.model.attach(watch_cmd);
  watch.reputation.attach(watch_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  configure_logging(ctx.verbose);
  try {
    if (*ingest_cmd) return run_ingest(ingest, out, err);
    if (*clean_cmd) return run_clean(clean, out);
    if (*classify_cmd) return run_classify(classify, ctx, out);
    if (*eval_cmd) return run_eval(eval, out);
    if (*compare_cmd) return run_compare(compare, out);
    if (*url_cmd) return run_url_scan(url_scan, ctx, out);
    if (*watch_cmd) return run_watch(watch, ctx, out);
  } catch (const Error& e) {
    emit_error(err, to_string(e.code()), e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    emit_error(err, "Internal", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace phishtriage::cli
