#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phishtriage/dataset.hpp"

namespace phishtriage {

/// Sorted, merged set of code point ranges (the emoji/pictograph table).
class CodepointRanges {
 public:
  CodepointRanges() = default;

  /// Lines of "START-END" or "CP" in hex; '#' starts a comment.
  /// Throws Error{InvalidConfig}.
  static CodepointRanges parse(std::string_view text);
  /// The table shipped in data/emoji_ranges.txt.
  static const CodepointRanges& emoji_defaults();

  void add(char32_t first, char32_t last);
  bool contains(char32_t cp) const noexcept;
  const std::vector<std::pair<char32_t, char32_t>>& ranges() const noexcept { return ranges_; }

 private:
  std::vector<std::pair<char32_t, char32_t>> ranges_;
};

/// Removes emoji (per `emoji`) and control characters, collapses every run of
/// whitespace into one space and trims both ends. Idempotent.
std::string clean_text(std::string_view text,
                       const CodepointRanges& emoji = CodepointRanges::emoji_defaults());

struct CorpusStats {
  std::size_t total = 0;
  std::size_t phishing = 0;
  std::size_t legit = 0;
  std::size_t unlabeled = 0;

  bool operator==(const CorpusStats&) const = default;
};

struct Corpus {
  std::vector<UniformRecord> records;
  CorpusStats stats;
};

struct FilterOptions {
  std::size_t min_len = 500;   ///< inclusive, in code points of the body
  std::size_t max_len = 2000;  ///< inclusive
};

struct FilterDiagnostics {
  std::size_t dropped_null = 0;
  std::size_t dropped_duplicate = 0;
  std::size_t dropped_length = 0;
};

/// Drops empty bodies, then exact duplicates of email_text (first occurrence
/// wins), then bodies outside [min_len, max_len].
Corpus filter_corpus(std::vector<UniformRecord> records, const FilterOptions& options = {},
                     FilterDiagnostics* diagnostics = nullptr);

std::size_t body_length(const UniformRecord& rec) noexcept;

CorpusStats count_labels(const std::vector<UniformRecord>& records) noexcept;

struct LengthHistogram {
  std::size_t min = 0;
  std::size_t max = 0;
  double mean = 0.0;
  std::array<std::size_t, 9> deciles{};  ///< 10th..90th percentile, nearest rank
};

struct CorpusSummary {
  CorpusStats stats;
  LengthHistogram lengths;
  /// phishing + legit + unlabeled == total
  bool consistent = true;
};

CorpusSummary corpus_stats(const Corpus& corpus);

std::string format_summary(const CorpusSummary& summary);

}  // namespace phishtriage
