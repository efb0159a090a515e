#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace phishtriage {

struct Link {
  std::string href;  ///< truncated
  std::string anchor_text;

  bool operator==(const Link&) const = default;
};

/// Analysis text for an HTML body. `text` holds visible text with whitespace
/// collapsed; the only markup left is `<a href="...">...</a>` and
/// `<img src="...">`. A literal '<' in content is kept escaped as "&lt;"
/// (and '&' as "&amp;" where it would otherwise read as an entity) so the text
/// can be reduced again without change.
struct ReducedBody {
  std::string text;
  std::vector<Link> links;
  std::vector<std::string> images;
  /// Elements dropped because they were styled with a zero font size.
  std::size_t hidden_text_removals = 0;
};

inline constexpr std::size_t kDefaultUrlTokenLimit = 10;

/// Reduces arbitrary (possibly malformed) HTML. Comments, CDATA, declarations
/// and the contents of script/style are dropped; anchors nested inside an
/// anchor are flattened into the outer one.
ReducedBody reduce_html(std::string_view html, std::size_t url_token_limit = kDefaultUrlTokenLimit);

/// Keeps scheme and authority, then at most `limit` tokens of the remainder.
/// Path segments (split on '/') are tokens, and so are the query and the
/// fragment; the fragment is cut first, then the query, then trailing path
/// segments. The result is always a prefix of the input. Text without a
/// "scheme://" prefix is returned unchanged.
std::string truncate_url(std::string_view url, std::size_t limit = kDefaultUrlTokenLimit);

/// Number of tokens truncate_url counts for `url` (0 for non-URLs).
std::size_t url_token_count(std::string_view url);

/// True for inline style declarations that set font-size to zero in any unit
/// ("font-size:0", "FONT-SIZE: 0px", "font-size:0.0em").
bool is_zero_font_size(std::string_view style) noexcept;

/// Decodes named (common subset) and numeric character references.
std::string decode_entities(std::string_view text);

}  // namespace phishtriage
