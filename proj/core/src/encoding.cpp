#include "phishtriage/encoding.hpp"

#include <iconv.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>

#include "phishtriage/utf8.hpp"

namespace phishtriage {
namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<int, 256> make_reverse() {
  std::array<int, 256> table{};
  for (auto& v : table) v = -1;
  for (int i = 0; i < 64; ++i) table[static_cast<unsigned char>(kAlphabet[i])] = i;
  return table;
}

constexpr auto kReverse = make_reverse();

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

int hex_value(char c) noexcept {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_utf8_label(std::string_view charset) {
  const auto cs = lower(charset);
  return cs.empty() || cs == "utf-8" || cs == "utf8" || cs == "us-ascii" || cs == "ascii";
}

class Iconv {
 public:
  explicit Iconv(const std::string& from) : cd_(iconv_open("UTF-8", from.c_str())) {}
  ~Iconv() {
    if (ok()) iconv_close(cd_);
  }
  Iconv(const Iconv&) = delete;
  Iconv& operator=(const Iconv&) = delete;

  bool ok() const noexcept { return cd_ != reinterpret_cast<iconv_t>(-1); }

  std::string convert(std::string_view bytes) {
    std::string out;
    std::array<char, 4096> buf{};
    char* in = const_cast<char*>(bytes.data());
    std::size_t in_left = bytes.size();
    while (in_left > 0) {
      char* dst = buf.data();
      std::size_t dst_left = buf.size();
      const std::size_t rc = iconv(cd_, &in, &in_left, &dst, &dst_left);
      out.append(buf.data(), buf.size() - dst_left);
      if (rc == static_cast<std::size_t>(-1)) {
        if (errno == E2BIG) continue;
        // EILSEQ / EINVAL: replace the offending byte and resynchronize.
        utf8::append(out, utf8::kReplacement);
        ++in;
        --in_left;
        iconv(cd_, nullptr, nullptr, nullptr, nullptr);
      }
    }
    char* dst = buf.data();
    std::size_t dst_left = buf.size();
    iconv(cd_, nullptr, nullptr, &dst, &dst_left);
    out.append(buf.data(), buf.size() - dst_left);
    return out;
  }

 private:
  iconv_t cd_;
};

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  const auto at = [&](std::size_t k) { return static_cast<unsigned char>(bytes[k]); };
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (at(i) << 16) | (at(i + 1) << 8) | at(i + 2);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    unsigned v = at(i) << 16;
    if (rest == 2) v |= at(i + 1) << 8;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(rest == 2 ? kAlphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::optional<std::string> base64_decode(std::string_view encoded) {
  std::string compact;
  compact.reserve(encoded.size());
  for (char c : encoded) {
    if (!is_space(c)) compact.push_back(c);
  }
  std::size_t padding = 0;
  while (!compact.empty() && compact.back() == '=') {
    compact.pop_back();
    ++padding;
  }
  if (padding > 2) return std::nullopt;
  if ((compact.size() + padding) % 4 != 0) return std::nullopt;

  std::string out;
  out.reserve(compact.size() * 3 / 4);
  unsigned acc = 0;
  int bits = 0;
  for (char c : compact) {
    const int v = kReverse[static_cast<unsigned char>(c)];
    if (v < 0) return std::nullopt;
    acc = (acc << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

bool looks_like_base64(std::string_view body) noexcept {
  std::size_t significant = 0;
  std::size_t in_alphabet = 0;
  // Trailing blanks are common after the final line; anything else that is
  // not a line break means prose.
  std::size_t end = body.size();
  while (end > 0 && is_space(body[end - 1])) --end;
  std::size_t begin = 0;
  while (begin < end && is_space(body[begin])) ++begin;
  for (std::size_t i = begin; i < end; ++i) {
    const char c = body[i];
    if (c == '\r' || c == '\n') continue;
    if (is_space(c)) return false;
    ++significant;
    if (kReverse[static_cast<unsigned char>(c)] >= 0 || c == '=') ++in_alphabet;
  }
  if (significant < 16) return false;
  if (in_alphabet * 100 < significant * 95) return false;
  return significant % 4 == 0;
}

std::string quoted_printable_decode(std::string_view encoded, bool header_mode) {
  std::string out;
  out.reserve(encoded.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    const char c = encoded[i];
    if (header_mode && c == '_') {
      out.push_back(' ');
    } else if (c == '=') {
      // Soft line break: '=' followed by optional blanks then CRLF/LF.
      std::size_t j = i + 1;
      while (j < encoded.size() && (encoded[j] == ' ' || encoded[j] == '\t')) ++j;
      if (j < encoded.size() && (encoded[j] == '\r' || encoded[j] == '\n')) {
        if (encoded[j] == '\r' && j + 1 < encoded.size() && encoded[j + 1] == '\n') ++j;
        i = j;
        continue;
      }
      if (j == encoded.size()) {
        i = j;
        continue;
      }
      if (i + 2 < encoded.size()) {
        const int hi = hex_value(encoded[i + 1]);
        const int lo = hex_value(encoded[i + 2]);
        if (hi >= 0 && lo >= 0) {
          out.push_back(static_cast<char>(hi * 16 + lo));
          i += 2;
          continue;
        }
      }
      out.push_back(c);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string to_utf8(std::string_view bytes, std::string_view charset) {
  if (is_utf8_label(charset)) return utf8::sanitize(bytes);
  Iconv conv{std::string(charset)};
  if (!conv.ok()) return utf8::sanitize(bytes);
  return utf8::sanitize(conv.convert(bytes));
}

std::string decode_header_words(std::string_view value) {
  std::string out;
  std::size_t pos = 0;
  bool last_was_word = false;

  while (pos < value.size()) {
    const std::size_t start = value.find("=?", pos);
    if (start == std::string_view::npos) {
      out.append(value.substr(pos));
      break;
    }
    const std::size_t q1 = value.find('?', start + 2);
    const std::size_t q2 = q1 == std::string_view::npos ? q1 : value.find('?', q1 + 1);
    const std::size_t end = q2 == std::string_view::npos ? q2 : value.find("?=", q2 + 1);
    if (end == std::string_view::npos) {
      out.append(value.substr(pos));
      break;
    }
    const std::string_view between = value.substr(pos, start - pos);
    const bool only_ws =
        std::all_of(between.begin(), between.end(), [](char c) { return is_space(c); });
    if (!(last_was_word && only_ws)) out.append(between);

    std::string_view charset = value.substr(start + 2, q1 - start - 2);
    if (const auto star = charset.find('*'); star != std::string_view::npos) {
      charset = charset.substr(0, star);  // RFC 2231 language suffix
    }
    const std::string encoding = lower(value.substr(q1 + 1, q2 - q1 - 1));
    const std::string_view text = value.substr(q2 + 1, end - q2 - 1);
    const std::string_view whole = value.substr(start, end + 2 - start);

    std::optional<std::string> bytes;
    if (encoding == "b") {
      bytes = base64_decode(text);
    } else if (encoding == "q") {
      bytes = quoted_printable_decode(text, true);
    }
    if (bytes && text.find_first_of(" \t") == std::string_view::npos) {
      out.append(to_utf8(*bytes, charset));
      last_was_word = true;
    } else {
      out.append(whole);
      last_was_word = false;
    }
    pos = end + 2;
  }
  return out;
}

}  // namespace phishtriage
