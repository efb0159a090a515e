#include "phishtriage/url_analyzer.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <unordered_set>

#include "phishtriage/embedded_data.hpp"
#include "phishtriage/error.hpp"
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

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    line = line.substr(0, line.find('#'));
    const std::string t = trim(line);
    if (!t.empty()) fn(t);
  }
}

bool is_word_byte(unsigned char c) noexcept { return std::isalnum(c) || c == '_' || c >= 0x80; }

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

// Value of `attr="..."` inside a reduced-body tag.
std::optional<std::string> quoted_attr(std::string_view tag, std::string_view attr) {
  const std::string needle = std::string(attr) + "=\"";
  const auto start = tag.find(needle);
  if (start == std::string_view::npos) return std::nullopt;
  const auto value_begin = start + needle.size();
  const auto end = tag.find('"', value_begin);
  if (end == std::string_view::npos) return std::nullopt;
  return std::string(tag.substr(value_begin, end - value_begin));
}

void scan_bare_urls(std::string_view text, std::vector<std::string>& out) {
  static const std::regex bare(R"((?:https?://|www\.)[^\s<>"']+)", std::regex::icase | std::regex::optimize);
  const std::string plain(text);
  for (std::sregex_iterator it(plain.begin(), plain.end(), bare), end; it != end; ++it) {
    std::string url = it->str();
    while (!url.empty() && std::string_view(".,;:!?)]}'").find(url.back()) != std::string_view::npos) {
      url.pop_back();
    }
    url = replace_all(std::move(url), "&amp;", "&");
    if (url.size() > 4 && url != "www.") out.push_back(std::move(url));
  }
}

}  // namespace

BrandTable BrandTable::parse(std::string_view text) {
  BrandTable table;
  for_each_line(text, [&](const std::string& line) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "brand line without '=': " + line);
    Brand brand;
    brand.keyword = trim(std::string_view(line).substr(0, eq));
    std::string_view rest = std::string_view(line).substr(eq + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      std::string domain = lower(trim(rest.substr(0, comma)));
      if (!domain.empty()) brand.official_domains.push_back(std::move(domain));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (brand.keyword.empty() || brand.official_domains.empty()) {
      throw Error(ErrorCode::InvalidConfig, "brand line needs a keyword and a domain: " + line);
    }
    table.add(std::move(brand));
  });
  return table;
}

const BrandTable& BrandTable::defaults() {
  static const BrandTable table = parse(embedded::brands());
  return table;
}

void BrandTable::add(Brand brand) {
  const std::string key = lower(brand.keyword);
  const auto same = std::find_if(brands_.begin(), brands_.end(),
                                 [&](const Brand& b) { return lower(b.keyword) == key; });
  if (same != brands_.end()) {
    *same = std::move(brand);
  } else {
    brands_.push_back(std::move(brand));
  }
}

ShortenerList ShortenerList::parse(std::string_view text) {
  std::set<std::string> domains;
  for_each_line(text, [&](const std::string& line) { domains.insert(lower(line)); });
  return ShortenerList(std::move(domains));
}

const ShortenerList& ShortenerList::defaults() {
  static const ShortenerList list = parse(embedded::shorteners());
  return list;
}

bool ShortenerList::contains(std::string_view registrable_domain) const {
  return domains_.find(lower(registrable_domain)) != domains_.end();
}

std::optional<std::string> url_host(std::string_view url) {
  std::string_view rest;
  if (const auto scheme = url.find("://"); scheme != std::string_view::npos) {
    const auto name = url.substr(0, scheme);
    if (name.empty() || !std::all_of(name.begin(), name.end(), [](unsigned char c) {
          return std::isalnum(c) || c == '+' || c == '-' || c == '.';
        })) {
      return std::nullopt;
    }
    rest = url.substr(scheme + 3);
  } else if (url.size() > 4 && lower(url.substr(0, 4)) == "www.") {
    rest = url;
  } else {
    return std::nullopt;
  }
  auto authority = rest.substr(0, rest.find_first_of("/?#\\"));
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  std::string_view host = authority;
  if (!host.empty() && host.front() == '[') {
    const auto close = host.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = host.substr(0, close + 1);
  } else if (const auto colon = host.find(':'); colon != std::string_view::npos) {
    host = host.substr(0, colon);
  }
  while (!host.empty() && host.back() == '.') host.remove_suffix(1);
  if (host.empty()) return std::nullopt;
  return lower(host);
}

std::vector<std::string> extract_urls(const ReducedBody& body) {
  std::vector<std::string> ordered;
  const std::string_view text = body.text;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto lt = text.find('<', pos);
    scan_bare_urls(text.substr(pos, lt == std::string_view::npos ? std::string_view::npos : lt - pos), ordered);
    if (lt == std::string_view::npos) break;
    const auto gt = text.find('>', lt);
    if (gt == std::string_view::npos) break;
    const auto tag = text.substr(lt, gt - lt + 1);
    if (tag.starts_with("<a ")) {
      if (auto href = quoted_attr(tag, "href")) ordered.push_back(std::move(*href));
    } else if (tag.starts_with("<img ")) {
      if (auto src = quoted_attr(tag, "src")) ordered.push_back(std::move(*src));
    }
    pos = gt + 1;
  }
  // Links or images whose markup did not survive in the text still count.
  for (const auto& link : body.links) ordered.push_back(link.href);
  for (const auto& image : body.images) ordered.push_back(image);

  std::vector<std::string> urls;
  std::unordered_set<std::string> seen;
  for (auto& url : ordered) {
    if (url.empty()) continue;
    if (seen.insert(url).second) urls.push_back(std::move(url));
  }
  return urls;
}

bool mentions_keyword(std::string_view text, std::string_view keyword) {
  if (keyword.empty()) return false;
  const std::string hay = lower(text);
  const std::string needle = lower(keyword);
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_byte(static_cast<unsigned char>(hay[pos - 1]));
    const auto end = pos + needle.size();
    const bool right_ok = end >= hay.size() || !is_word_byte(static_cast<unsigned char>(hay[end]));
    if (left_ok && right_ok) return true;
  }
  return false;
}

UrlReport analyze_urls(std::string_view email_text, const std::vector<std::string>& urls,
                       ReputationClient* reputation, const AnalyzerOptions& options) {
  const PublicSuffixList& psl = options.psl ? *options.psl : PublicSuffixList::builtin();
  UrlReport report;
  report.findings.reserve(urls.size());
  for (const auto& url : urls) {
    UrlFinding finding;
    finding.url = url;
    if (const auto host = url_host(url)) finding.registrable_domain = psl.registrable_domain(*host);
    finding.is_shortened = options.shorteners && !finding.registrable_domain.empty() &&
                           options.shorteners->contains(finding.registrable_domain);
    if (reputation) {
      try {
        finding.reputation = reputation->query(url);
      } catch (const std::exception&) {
        finding.reputation = Reputation::Unknown;
        ++report.reputation_failures;
      }
    }
    report.findings.push_back(std::move(finding));
  }

  if (options.brands) {
    for (const auto& brand : options.brands->brands()) {
      if (!mentions_keyword(email_text, brand.keyword)) continue;
      const auto official = [&](const std::string& domain) {
        return std::find(brand.official_domains.begin(), brand.official_domains.end(), domain) !=
               brand.official_domains.end();
      };
      const bool links_official = std::any_of(report.findings.begin(), report.findings.end(),
                                              [&](const UrlFinding& f) { return official(f.registrable_domain); });
      if (links_official) continue;
      for (auto& f : report.findings) {
        if (f.brand_mismatch || f.registrable_domain.empty() || official(f.registrable_domain)) continue;
        f.brand_mismatch = BrandMismatch{brand.keyword, brand.official_domains.front()};
      }
    }
  }
  report.summary = render_url_summary(report, options.summary_budget);
  return report;
}

std::string render_url_summary(const UrlReport& report, std::size_t budget) {
  std::vector<std::string> lines;
  lines.push_back("URLs found: " + std::to_string(report.findings.size()) +
                  "; hidden text elements removed: " + std::to_string(report.hidden_text_removals));
  for (const auto& f : report.findings) {
    std::string line = "- " + f.url + " (domain " + (f.registrable_domain.empty() ? "unknown" : f.registrable_domain);
    line += "; reputation " + std::string(to_string(f.reputation));
    if (f.is_shortened) line += "; shortened link hides its destination";
    if (f.brand_mismatch) {
      line += "; mentions " + f.brand_mismatch->brand + " but does not point to " + f.brand_mismatch->expected_domain;
    }
    line += ")";
    lines.push_back(std::move(line));
  }
  if (report.reputation_failures > 0) {
    lines.push_back("Reputation lookups failed: " + std::to_string(report.reputation_failures));
  }

  std::string out;
  std::size_t used = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t cost = utf8::codepoint_count(lines[i]) + (out.empty() ? 0 : 1);
    const std::size_t remaining = lines.size() - i - 1;
    const std::string more = "... " + std::to_string(lines.size() - i) + " more";
    const std::size_t reserve = remaining > 0 ? more.size() + 1 : 0;
    if (used + cost + reserve > budget) {
      if (used + more.size() + 1 <= budget) {
        out += (out.empty() ? "" : "\n") + more;
      } else if (out.empty()) {
        out = std::string(utf8::prefix_codepoints(lines[i], budget));
      }
      return out;
    }
    if (!out.empty()) out += '\n';
    out += lines[i];
    used += cost;
  }
  return out;
}

UrlReport analyze_email(const PreparedEmail& email, ReputationClient* reputation, const AnalyzerOptions& options) {
  UrlReport report = analyze_urls(email.record.email_text, extract_urls(email.reduced), reputation, options);
  report.hidden_text_removals = email.reduced.hidden_text_removals;
  report.summary = render_url_summary(report, options.summary_budget);
  return report;
}

}  // namespace phishtriage
