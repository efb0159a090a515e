#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

namespace phishtriage {

/// Public suffix list matcher (normal, wildcard and exception rules, with the
/// implicit "*" default rule).
class PublicSuffixList {
 public:
  /// Parses the publicsuffix.org text format.
  static PublicSuffixList parse(std::string_view text);
  /// The snapshot bundled with the library.
  static const PublicSuffixList& builtin();

  /// Longest public suffix of `host`. Hosts are lower-cased; a trailing dot is
  /// ignored.
  std::string public_suffix(std::string_view host) const;

  /// eTLD+1. IP literals, single labels and hosts that are themselves public
  /// suffixes are returned as-is (lower-cased).
  std::string registrable_domain(std::string_view host) const;

  std::size_t rule_count() const noexcept { return rules_.size() + wildcards_.size() + exceptions_.size(); }

 private:
  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;   ///< stored without the "*."
  std::unordered_set<std::string> exceptions_;  ///< stored without the "!"
};

bool is_ip_literal(std::string_view host) noexcept;

}  // namespace phishtriage
