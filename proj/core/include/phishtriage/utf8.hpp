#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace phishtriage::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes the code point starting at `pos` and advances `pos`. Malformed or
/// truncated sequences consume one byte and yield U+FFFD.
char32_t decode_next(std::string_view text, std::size_t& pos) noexcept;

void append(std::string& out, char32_t cp);

/// Re-encodes `text` so that every malformed byte becomes U+FFFD.
std::string sanitize(std::string_view text);

std::size_t codepoint_count(std::string_view text) noexcept;

/// Longest prefix of `text` holding at most `max_codepoints` code points,
/// never splitting a multi-byte sequence.
std::string_view prefix_codepoints(std::string_view text, std::size_t max_codepoints) noexcept;

}  // namespace phishtriage::utf8
