#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "phishtriage/html_reducer.hpp"
#include "phishtriage/pipeline.hpp"
#include "phishtriage/public_suffix.hpp"
#include "phishtriage/reputation.hpp"

namespace phishtriage {

struct Brand {
  std::string keyword;
  std::vector<std::string> official_domains;  ///< first one is reported
};

class BrandTable {
 public:
  BrandTable() = default;

  /// "Keyword = domain, domain, ..." lines. Throws Error{InvalidConfig}.
  static BrandTable parse(std::string_view text);
  static const BrandTable& defaults();

  void add(Brand brand);
  const std::vector<Brand>& brands() const noexcept { return brands_; }

 private:
  std::vector<Brand> brands_;
};

class ShortenerList {
 public:
  ShortenerList() = default;
  explicit ShortenerList(const std::set<std::string>& domains) : domains_(domains.begin(), domains.end()) {}

  static ShortenerList parse(std::string_view text);
  static const ShortenerList& defaults();

  bool contains(std::string_view registrable_domain) const;
  const std::set<std::string, std::less<>>& domains() const noexcept { return domains_; }

 private:
  std::set<std::string, std::less<>> domains_;
};

struct BrandMismatch {
  std::string brand;
  std::string expected_domain;

  bool operator==(const BrandMismatch&) const = default;
};

struct UrlFinding {
  std::string url;
  std::string registrable_domain;
  bool is_shortened = false;
  std::optional<BrandMismatch> brand_mismatch;
  Reputation reputation = Reputation::Unknown;
};

struct UrlReport {
  std::vector<UrlFinding> findings;
  std::size_t hidden_text_removals = 0;
  std::size_t reputation_failures = 0;
  std::string summary;
};

struct AnalyzerOptions {
  const BrandTable* brands = &BrandTable::defaults();
  const ShortenerList* shorteners = &ShortenerList::defaults();
  const PublicSuffixList* psl = &PublicSuffixList::builtin();
  std::size_t summary_budget = 1500;  ///< characters
};

/// Lower-cased host of an absolute URL ("scheme://[user@]host[:port]/...")
/// or of a scheme-less "www." URL; nullopt otherwise.
std::optional<std::string> url_host(std::string_view url);

/// Link hrefs, image srcs and bare http(s)/www URLs in the text, in order of
/// first appearance, duplicates removed.
std::vector<std::string> extract_urls(const ReducedBody& body);

/// Whole-word, case-insensitive keyword test.
bool mentions_keyword(std::string_view text, std::string_view keyword);

UrlReport analyze_urls(std::string_view email_text, const std::vector<std::string>& urls,
                       ReputationClient* reputation, const AnalyzerOptions& options = {});

/// analyze_urls over a prepared email, with the hidden-text count and the
/// summary filled in.
UrlReport analyze_email(const PreparedEmail& email, ReputationClient* reputation,
                        const AnalyzerOptions& options = {});

/// Bounded text block listing the findings, used as LLM context and in the
/// user report.
std::string render_url_summary(const UrlReport& report, std::size_t budget);

}  // namespace phishtriage
