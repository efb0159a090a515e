#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace phishtriage {

std::string base64_encode(std::string_view bytes);

/// Strict decoder for transfer-encoded bodies. Whitespace (line wrapping) is
/// ignored; any other non-alphabet byte, misplaced padding or an impossible
/// length makes the whole payload invalid.
std::optional<std::string> base64_decode(std::string_view encoded);

/// Heuristic for bodies that carry no transfer-encoding header: at least 95% of
/// the non-whitespace characters are in the base64 alphabet, the padded length
/// is a multiple of four, the only whitespace is line breaks and there are at
/// least 16 significant characters.
bool looks_like_base64(std::string_view body) noexcept;

/// Decodes quoted-printable. In header mode '_' stands for a space (RFC 2047
/// "Q" encoding). Malformed escapes pass through unchanged.
std::string quoted_printable_decode(std::string_view encoded, bool header_mode = false);

/// Converts `bytes` in `charset` to UTF-8. An empty or unknown charset is
/// treated as UTF-8; invalid sequences become U+FFFD in either case.
std::string to_utf8(std::string_view bytes, std::string_view charset);

/// Decodes RFC 2047 encoded-words ("=?utf-8?B?...?="). Whitespace between two
/// adjacent encoded-words is dropped; words that fail to decode are kept
/// verbatim.
std::string decode_header_words(std::string_view value);

}  // namespace phishtriage
