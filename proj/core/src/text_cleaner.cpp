#include "phishtriage/text_cleaner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "phishtriage/embedded_data.hpp"
#include "phishtriage/error.hpp"
#include "phishtriage/utf8.hpp"

namespace phishtriage {
namespace {

bool is_space_cp(char32_t cp) noexcept {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v' ||
         cp == 0x85 || cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

bool is_control_cp(char32_t cp) noexcept {
  return cp < 0x20 || (cp >= 0x7F && cp <= 0x9F);
}

/// Zero-width and bidi format characters; they carry no content.
bool is_format_cp(char32_t cp) noexcept {
  return cp == 0xAD || (cp >= 0x200B && cp <= 0x200F) || (cp >= 0x202A && cp <= 0x202E) ||
         (cp >= 0x2060 && cp <= 0x2064) || cp == 0xFEFF;
}

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

char32_t parse_hex(std::string_view text, std::size_t line_no) {
  unsigned long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value > 0x10FFFF) {
    throw Error(ErrorCode::InvalidConfig,
                "codepoint range line " + std::to_string(line_no) + ": bad value '" + std::string(text) + "'");
  }
  return static_cast<char32_t>(value);
}

}  // namespace

CodepointRanges CodepointRanges::parse(std::string_view text) {
  CodepointRanges ranges;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto dash = line.find('-');
    if (dash == std::string_view::npos) {
      const char32_t cp = parse_hex(line, line_no);
      ranges.add(cp, cp);
    } else {
      const char32_t first = parse_hex(trim(line.substr(0, dash)), line_no);
      const char32_t last = parse_hex(trim(line.substr(dash + 1)), line_no);
      if (last < first) {
        throw Error(ErrorCode::InvalidConfig, "codepoint range line " + std::to_string(line_no) + ": reversed range");
      }
      ranges.add(first, last);
    }
  }
  return ranges;
}

const CodepointRanges& CodepointRanges::emoji_defaults() {
  static const CodepointRanges ranges = parse(embedded::emoji_ranges());
  return ranges;
}

void CodepointRanges::add(char32_t first, char32_t last) {
  ranges_.emplace_back(first, last);
  std::sort(ranges_.begin(), ranges_.end());
  std::vector<std::pair<char32_t, char32_t>> merged;
  for (const auto& r : ranges_) {
    if (!merged.empty() && r.first <= merged.back().second + 1) {
      merged.back().second = std::max(merged.back().second, r.second);
    } else {
      merged.push_back(r);
    }
  }
  ranges_ = std::move(merged);
}

bool CodepointRanges::contains(char32_t cp) const noexcept {
  const auto it = std::upper_bound(ranges_.begin(), ranges_.end(), cp,
                                   [](char32_t v, const auto& r) { return v < r.first; });
  if (it == ranges_.begin()) return false;
  return cp <= std::prev(it)->second;
}

std::string clean_text(std::string_view text, const CodepointRanges& emoji) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::decode_next(text, pos);
    if (is_space_cp(cp)) {
      pending_space = true;
      continue;
    }
    if (emoji.contains(cp) || is_control_cp(cp) || is_format_cp(cp)) continue;
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    utf8::append(out, cp);
  }
  return out;
}

std::size_t body_length(const UniformRecord& rec) noexcept {
  return utf8::codepoint_count(rec.body());
}

CorpusStats count_labels(const std::vector<UniformRecord>& records) noexcept {
  CorpusStats stats;
  stats.total = records.size();
  for (const auto& r : records) {
    if (!r.label) ++stats.unlabeled;
    else if (*r.label == Label::Phishing) ++stats.phishing;
    else ++stats.legit;
  }
  return stats;
}

Corpus filter_corpus(std::vector<UniformRecord> records, const FilterOptions& options,
                     FilterDiagnostics* diagnostics) {
  FilterDiagnostics diag;
  Corpus corpus;
  std::unordered_set<std::string_view> seen;
  seen.reserve(records.size());
  // Survivors are moved out only after the dedup pass so the string_views in
  // `seen` stay valid.
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.body().empty()) {
      ++diag.dropped_null;
      continue;
    }
    if (!seen.insert(rec.email_text).second) {
      ++diag.dropped_duplicate;
      continue;
    }
    const std::size_t len = body_length(rec);
    if (len < options.min_len || len > options.max_len) {
      ++diag.dropped_length;
      continue;
    }
    keep.push_back(i);
  }
  corpus.records.reserve(keep.size());
  for (const std::size_t i : keep) corpus.records.push_back(std::move(records[i]));
  corpus.stats = count_labels(corpus.records);
  if (diagnostics) *diagnostics = diag;
  return corpus;
}

CorpusSummary corpus_stats(const Corpus& corpus) {
  CorpusSummary summary;
  summary.stats = count_labels(corpus.records);
  summary.consistent = summary.stats.phishing + summary.stats.legit + summary.stats.unlabeled ==
                           summary.stats.total &&
                       summary.stats == corpus.stats;
  if (corpus.records.empty()) return summary;

  std::vector<std::size_t> lengths;
  lengths.reserve(corpus.records.size());
  for (const auto& r : corpus.records) lengths.push_back(body_length(r));
  std::sort(lengths.begin(), lengths.end());
  auto& h = summary.lengths;
  h.min = lengths.front();
  h.max = lengths.back();
  double sum = 0.0;
  for (const auto l : lengths) sum += static_cast<double>(l);
  h.mean = sum / static_cast<double>(lengths.size());
  const auto n = lengths.size();
  for (std::size_t d = 1; d <= 9; ++d) {
    // Nearest rank: ceil(p * n), computed in integers.
    std::size_t rank = (d * n + 9) / 10;
    if (rank == 0) rank = 1;
    h.deciles[d - 1] = lengths[rank - 1];
  }
  return summary;
}

std::string format_summary(const CorpusSummary& summary) {
  const auto& s = summary.stats;
  std::string out = "total=" + std::to_string(s.total) + " phishing=" + std::to_string(s.phishing) +
                    " legit=" + std::to_string(s.legit) + " unlabeled=" + std::to_string(s.unlabeled) +
                    " consistent=" + (summary.consistent ? "yes" : "no") + "\n";
  char mean[32];
  std::snprintf(mean, sizeof mean, "%.1f", summary.lengths.mean);
  out += "length min=" + std::to_string(summary.lengths.min) + " max=" + std::to_string(summary.lengths.max) +
         " mean=" + mean + " deciles=";
  for (std::size_t i = 0; i < summary.lengths.deciles.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(summary.lengths.deciles[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace phishtriage
