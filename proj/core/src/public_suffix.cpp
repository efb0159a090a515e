#include "phishtriage/public_suffix.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cctype>
#include <vector>

#include "phishtriage/embedded_data.hpp"

namespace phishtriage {
namespace {

std::string normalize_host(std::string_view host) {
  std::string out(host);
  while (!out.empty() && out.back() == '.') out.pop_back();
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split_labels(std::string_view host) {
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (true) {
    const auto dot = host.find('.', start);
    labels.push_back(host.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return labels;
}

// Joins labels[from..] with dots.
std::string join_from(const std::vector<std::string_view>& labels, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < labels.size(); ++i) {
    if (!out.empty()) out += '.';
    out.append(labels[i]);
  }
  return out;
}

}  // namespace

bool is_ip_literal(std::string_view host) noexcept {
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  if (host.empty() || host.size() > 45) return false;
  char buf[46] = {};
  std::copy(host.begin(), host.end(), buf);
  unsigned char addr[16];
  return inet_pton(AF_INET, buf, addr) == 1 || inet_pton(AF_INET6, buf, addr) == 1;
}

PublicSuffixList PublicSuffixList::parse(std::string_view text) {
  PublicSuffixList psl;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    // A rule ends at the first whitespace.
    const auto ws = line.find_first_of(" \t\r");
    if (ws != std::string_view::npos) line = line.substr(0, ws);
    if (line.empty() || line.starts_with("//")) continue;
    if (line.front() == '!') {
      psl.exceptions_.insert(normalize_host(line.substr(1)));
    } else if (line.starts_with("*.")) {
      psl.wildcards_.insert(normalize_host(line.substr(2)));
    } else {
      psl.rules_.insert(normalize_host(line));
    }
    if (eol == text.size()) break;
  }
  return psl;
}

const PublicSuffixList& PublicSuffixList::builtin() {
  static const PublicSuffixList list = parse(embedded::public_suffix_list());
  return list;
}

std::string PublicSuffixList::public_suffix(std::string_view host_in) const {
  const std::string host = normalize_host(host_in);
  if (host.empty()) return host;
  if (is_ip_literal(host)) return host;
  const auto labels = split_labels(host);
  const std::size_t n = labels.size();
  // Suffix length in labels; the implicit "*" rule gives 1.
  std::size_t best = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string candidate = join_from(labels, i);
    const std::size_t len = n - i;
    if (exceptions_.contains(candidate)) {
      // An exception wins over everything and drops its leftmost label.
      best = len - 1;
      break;
    }
    if (len > best && rules_.contains(candidate)) best = len;
    if (i > 0 && len + 1 > best && wildcards_.contains(candidate)) best = len + 1;
  }
  best = std::max<std::size_t>(1, std::min(best, n));
  return join_from(labels, n - best);
}

std::string PublicSuffixList::registrable_domain(std::string_view host_in) const {
  const std::string host = normalize_host(host_in);
  if (host.empty() || is_ip_literal(host)) return host;
  const auto labels = split_labels(host);
  const std::string suffix = public_suffix(host);
  const std::size_t suffix_labels = split_labels(suffix).size();
  if (suffix_labels >= labels.size()) return host;
  return join_from(labels, labels.size() - suffix_labels - 1);
}

}  // namespace phishtriage
