#include "phishtriage/html_reducer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <utility>

#include "phishtriage/utf8.hpp"

namespace phishtriage {
namespace {

struct NamedEntity {
  std::string_view name;
  char32_t cp;
};

// Common subset; anything else is left as written.
constexpr std::array<NamedEntity, 64> kEntities{{
    {"amp", U'&'},      {"lt", U'<'},        {"gt", U'>'},       {"quot", U'"'},
    {"apos", U'\''},    {"nbsp", 0xA0},      {"copy", 0xA9},     {"reg", 0xAE},
    {"trade", 0x2122},  {"hellip", 0x2026},  {"mdash", 0x2014},  {"ndash", 0x2013},
    {"lsquo", 0x2018},  {"rsquo", 0x2019},   {"ldquo", 0x201C},  {"rdquo", 0x201D},
    {"sbquo", 0x201A},  {"bdquo", 0x201E},   {"bull", 0x2022},   {"middot", 0xB7},
    {"euro", 0x20AC},   {"pound", 0xA3},     {"yen", 0xA5},      {"cent", 0xA2},
    {"sect", 0xA7},     {"para", 0xB6},      {"deg", 0xB0},      {"plusmn", 0xB1},
    {"times", 0xD7},    {"divide", 0xF7},    {"laquo", 0xAB},    {"raquo", 0xBB},
    {"iexcl", 0xA1},    {"iquest", 0xBF},    {"shy", 0xAD},      {"zwnj", 0x200C},
    {"zwj", 0x200D},    {"thinsp", 0x2009},  {"ensp", 0x2002},   {"emsp", 0x2003},
    {"aacute", 0xE1},   {"eacute", 0xE9},    {"iacute", 0xED},   {"oacute", 0xF3},
    {"uacute", 0xFA},   {"Aacute", 0xC1},    {"Eacute", 0xC9},   {"Oacute", 0xD3},
    {"agrave", 0xE0},   {"egrave", 0xE8},    {"ccedil", 0xE7},   {"ntilde", 0xF1},
    {"Ntilde", 0xD1},   {"auml", 0xE4},      {"ouml", 0xF6},     {"uuml", 0xFC},
    {"Auml", 0xC4},     {"Ouml", 0xD6},      {"Uuml", 0xDC},     {"szlig", 0xDF},
    {"ecirc", 0xEA},    {"acirc", 0xE2},     {"ocirc", 0xF4},    {"rarr", 0x2192},
}};

constexpr std::array<std::string_view, 14> kVoidElements{
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source", "track", "wbr"};

constexpr std::array<std::string_view, 34> kBlockElements{
    "address", "article", "aside", "blockquote", "br", "center", "dd", "div", "dl", "dt", "footer", "form",
    "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "li", "nav", "ol", "p", "pre", "section", "table",
    "tbody", "td", "th", "thead", "title", "tr", "ul"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view name) {
  return std::find(set.begin(), set.end(), name) != set.end();
}

bool is_ascii_alpha(char c) noexcept { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

char lower_char(char c) noexcept { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower_char);
  return out;
}

bool istarts_with(std::string_view text, std::size_t pos, std::string_view prefix) noexcept {
  if (text.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower_char(text[pos + i]) != prefix[i]) return false;
  }
  return true;
}

bool is_html_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

bool is_collapsible_space(char32_t cp) noexcept {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v' ||
         cp == 0x85 || cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

/// Invisible format characters used to break up keywords.
bool is_invisible(char32_t cp) noexcept {
  return cp == 0xAD || cp == 0x200B || cp == 0x200C || cp == 0x200E || cp == 0x200F || cp == 0x2060 ||
         cp == 0xFEFF;
}

/// Character reference starting at text[pos] == '&': (length, code point).
std::optional<std::pair<std::size_t, char32_t>> entity_at(std::string_view text, std::size_t pos) {
  if (pos + 2 >= text.size() || text[pos] != '&') return std::nullopt;
  const std::size_t semi = text.find(';', pos + 1);
  if (semi == std::string_view::npos || semi - pos > 12) return std::nullopt;
  const std::string_view body = text.substr(pos + 1, semi - pos - 1);
  if (body.empty()) return std::nullopt;
  if (body.front() == '#') {
    const bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
    const std::string_view digits = body.substr(hex ? 2 : 1);
    if (digits.empty()) return std::nullopt;
    char32_t cp = 0;
    for (char c : digits) {
      int v = -1;
      if (c >= '0' && c <= '9') v = c - '0';
      else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
      else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
      if (v < 0) return std::nullopt;
      cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(v);
      if (cp > 0x10FFFF) cp = 0x110000;
    }
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = utf8::kReplacement;
    return std::pair{semi - pos + 1, cp};
  }
  for (const auto& e : kEntities) {
    if (e.name == body) return std::pair{semi - pos + 1, e.cp};
  }
  return std::nullopt;
}

/// Text content with '<' and entity-like '&' escaped again, so the output
/// scans as text and decodes back to the same characters.
void append_escaped(std::string& out, std::string_view decoded) {
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    const char c = decoded[i];
    if (c == '<') {
      out += "&lt;";
    } else if (c == '&' && entity_at(decoded, i)) {
      out += "&amp;";
    } else {
      out.push_back(c);
    }
  }
}

/// URL as retained in an attribute: trimmed, internal line breaks and tabs
/// removed, characters that would end the attribute percent-encoded.
std::string sanitize_url(std::string_view raw) {
  std::string out;
  std::size_t b = 0;
  std::size_t e = raw.size();
  while (b < e && (is_html_space(raw[b]) || static_cast<unsigned char>(raw[b]) < 0x20)) ++b;
  while (e > b && (is_html_space(raw[e - 1]) || static_cast<unsigned char>(raw[e - 1]) < 0x20)) --e;
  for (std::size_t i = b; i < e; ++i) {
    const char c = raw[i];
    switch (c) {
      case '\t':
      case '\n':
      case '\r':
        break;
      case ' ':
        out += "%20";
        break;
      case '"':
        out += "%22";
        break;
      case '<':
        out += "%3C";
        break;
      case '>':
        out += "%3E";
        break;
      default:
        if (static_cast<unsigned char>(c) >= 0x20) out.push_back(c);
    }
  }
  return out;
}

struct Attribute {
  std::string name;
  std::string value;
};

struct Tag {
  std::string name;
  std::vector<Attribute> attributes;
  bool end = false;

  const std::string* attribute(std::string_view key) const {
    for (const auto& a : attributes) {
      if (a.name == key) return &a.value;
    }
    return nullptr;
  }
};

bool is_name_char(char c) noexcept {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == ':' || c == '_' || c == '.';
}

/// Parses a tag starting at html[pos] == '<'. Returns the position after '>',
/// or npos when the tag is never closed.
std::size_t parse_tag(std::string_view html, std::size_t pos, Tag& tag) {
  std::size_t i = pos + 1;
  if (html[i] == '/') {
    tag.end = true;
    ++i;
  }
  const std::size_t name_start = i;
  while (i < html.size() && is_name_char(html[i])) ++i;
  tag.name = lower(html.substr(name_start, i - name_start));

  while (i < html.size()) {
    while (i < html.size() && (is_html_space(html[i]) || html[i] == '/')) ++i;
    if (i >= html.size()) break;
    if (html[i] == '>') return i + 1;
    const std::size_t an = i;
    while (i < html.size() && !is_html_space(html[i]) && html[i] != '=' && html[i] != '>' && html[i] != '/') ++i;
    if (i == an) ++i;  // stray '=': skip it
    Attribute attr{lower(html.substr(an, i - an)), {}};
    std::size_t j = i;
    while (j < html.size() && is_html_space(html[j])) ++j;
    if (j < html.size() && html[j] == '=') {
      ++j;
      while (j < html.size() && is_html_space(html[j])) ++j;
      if (j < html.size() && (html[j] == '"' || html[j] == '\'')) {
        const char quote = html[j];
        const std::size_t close = html.find(quote, j + 1);
        if (close == std::string_view::npos) return std::string_view::npos;
        attr.value = html.substr(j + 1, close - j - 1);
        i = close + 1;
      } else {
        const std::size_t vs = j;
        while (j < html.size() && !is_html_space(html[j]) && html[j] != '>') ++j;
        attr.value = html.substr(vs, j - vs);
        i = j;
      }
    }
    if (!attr.name.empty() && !tag.end) tag.attributes.push_back(std::move(attr));
  }
  return std::string_view::npos;
}

class Reducer {
 public:
  explicit Reducer(std::size_t url_token_limit) : limit_(url_token_limit) {}

  ReducedBody run(std::string_view html) {
    std::size_t pos = 0;
    while (pos < html.size()) {
      if (html[pos] != '<') {
        const std::size_t next = html.find('<', pos);
        text(html.substr(pos, next == std::string_view::npos ? html.npos : next - pos));
        pos = next == std::string_view::npos ? html.size() : next;
        continue;
      }
      pos = markup(html, pos);
    }
    while (!stack_.empty()) pop();
    return std::move(result_);
  }

 private:
  struct Open {
    std::string name;
    bool hidden = false;
    bool anchor_root = false;
  };

  std::size_t markup(std::string_view html, std::size_t pos) {
    if (istarts_with(html, pos, "<!--")) {
      const std::size_t end = html.find("-->", pos + 4);
      return end == std::string_view::npos ? html.size() : end + 3;
    }
    if (istarts_with(html, pos, "<![cdata[")) {
      const std::size_t end = html.find("]]>", pos + 9);
      return end == std::string_view::npos ? html.size() : end + 3;
    }
    const char next = pos + 1 < html.size() ? html[pos + 1] : '\0';
    if (next == '!' || next == '?') {
      const std::size_t end = html.find('>', pos + 2);
      return end == std::string_view::npos ? html.size() : end + 1;
    }
    const bool start_tag = is_ascii_alpha(next);
    const bool end_tag = next == '/' && pos + 2 < html.size() && is_ascii_alpha(html[pos + 2]);
    if (!start_tag && !end_tag) {
      text(html.substr(pos, 1));
      return pos + 1;
    }
    Tag tag;
    const std::size_t after = parse_tag(html, pos, tag);
    if (after == std::string_view::npos) return html.size();
    if (tag.end) {
      end_element(tag.name);
      return after;
    }
    if (tag.name == "script" || tag.name == "style") {
      // Raw text: skip to the matching end tag.
      const std::string close = "</" + tag.name;
      for (std::size_t i = after; i < html.size(); ++i) {
        if (html[i] == '<' && istarts_with(html, i, close)) {
          const std::size_t gt = html.find('>', i);
          return gt == std::string_view::npos ? html.size() : gt + 1;
        }
      }
      return html.size();
    }
    start_element(tag);
    return after;
  }

  bool hidden() const noexcept { return hidden_depth_ > 0; }

  void start_element(const Tag& tag) {
    if (contains(kBlockElements, tag.name)) pending_space_ = true;
    if (tag.name == "img") {
      if (hidden()) return;
      const std::string* src = tag.attribute("src");
      if (!src) return;
      std::string url = truncate_url(sanitize_url(decode_entities(*src)), limit_);
      if (url.empty()) return;
      flush_space();
      result_.text += "<img src=\"";
      append_escaped(result_.text, url);
      result_.text += "\">";
      result_.images.push_back(std::move(url));
      return;
    }
    if (contains(kVoidElements, tag.name)) return;

    Open open{tag.name, false, false};
    if (const std::string* style = tag.attribute("style"); style && is_zero_font_size(decode_entities(*style))) {
      open.hidden = true;
      if (!hidden()) ++result_.hidden_text_removals;
      ++hidden_depth_;
    }
    if (tag.name == "a" && !hidden() && !anchor_open_) {
      if (const std::string* href = tag.attribute("href")) {
        std::string url = truncate_url(sanitize_url(decode_entities(*href)), limit_);
        if (!url.empty()) {
          flush_space();
          result_.text += "<a href=\"";
          append_escaped(result_.text, url);
          result_.text += "\">";
          anchor_open_ = true;
          anchor_href_ = std::move(url);
          anchor_text_.clear();
          at_anchor_start_ = true;
          open.anchor_root = true;
        }
      }
    }
    stack_.push_back(std::move(open));
  }

  void end_element(const std::string& name) {
    if (contains(kBlockElements, name)) pending_space_ = true;
    const auto it = std::find_if(stack_.rbegin(), stack_.rend(), [&](const Open& o) { return o.name == name; });
    if (it == stack_.rend()) return;
    const std::size_t keep = static_cast<std::size_t>(stack_.rend() - it) - 1;
    while (stack_.size() > keep) pop();
  }

  void pop() {
    const Open top = std::move(stack_.back());
    stack_.pop_back();
    if (top.hidden) --hidden_depth_;
    if (top.anchor_root) {
      result_.text += "</a>";
      result_.links.push_back({anchor_href_, anchor_text_});
      anchor_open_ = false;
      at_anchor_start_ = false;
    }
  }

  void flush_space() {
    if (pending_space_ && !result_.text.empty() && !at_anchor_start_) {
      result_.text.push_back(' ');
      if (anchor_open_) anchor_text_.push_back(' ');
    }
    pending_space_ = false;
  }

  void text(std::string_view raw) {
    if (hidden() || raw.empty()) return;
    const std::string decoded = decode_entities(raw);
    std::size_t pos = 0;
    std::string chunk;
    while (pos < decoded.size()) {
      const std::size_t start = pos;
      const char32_t cp = utf8::decode_next(decoded, pos);
      if (is_collapsible_space(cp)) {
        pending_space_ = true;
        continue;
      }
      if (is_invisible(cp)) continue;
      flush_space();
      at_anchor_start_ = false;
      const std::string_view piece = std::string_view(decoded).substr(start, pos - start);
      append_escaped(result_.text, piece);
      if (anchor_open_) anchor_text_.append(piece);
    }
  }

  std::size_t limit_;
  ReducedBody result_;
  std::vector<Open> stack_;
  std::size_t hidden_depth_ = 0;
  bool pending_space_ = false;
  bool anchor_open_ = false;
  bool at_anchor_start_ = false;
  std::string anchor_href_;
  std::string anchor_text_;
};

/// Position just past "scheme://", or npos when `url` has no such prefix.
std::size_t authority_start(std::string_view url) noexcept {
  if (url.empty() || !is_ascii_alpha(url.front())) return std::string_view::npos;
  std::size_t i = 1;
  while (i < url.size() && (std::isalnum(static_cast<unsigned char>(url[i])) || url[i] == '+' ||
                            url[i] == '-' || url[i] == '.')) {
    ++i;
  }
  if (url.substr(i, 3) != "://") return std::string_view::npos;
  return i + 3;
}

struct UrlLayout {
  std::size_t path_begin = 0;
  std::size_t path_end = 0;  ///< start of '?' or '#' or size
  std::optional<std::size_t> query;
  std::optional<std::size_t> fragment;
  std::size_t path_tokens = 0;
};

std::optional<UrlLayout> layout(std::string_view url) {
  const std::size_t auth = authority_start(url);
  if (auth == std::string_view::npos) return std::nullopt;
  UrlLayout l;
  l.path_begin = std::min(url.find_first_of("/?#", auth), url.size());
  if (const auto f = url.find('#', l.path_begin); f != std::string_view::npos) l.fragment = f;
  const std::size_t before_fragment = l.fragment.value_or(url.size());
  if (const auto q = url.find('?', l.path_begin); q != std::string_view::npos && q < before_fragment) {
    l.query = q;
  }
  l.path_end = l.query.value_or(before_fragment);
  const std::string_view path = url.substr(l.path_begin, l.path_end - l.path_begin);
  l.path_tokens = static_cast<std::size_t>(std::count(path.begin(), path.end(), '/'));
  return l;
}

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t amp = text.find('&', pos);
    if (amp == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, amp - pos));
    if (const auto ent = entity_at(text, amp)) {
      utf8::append(out, ent->second);
      pos = amp + ent->first;
    } else {
      out.push_back('&');
      pos = amp + 1;
    }
  }
  return out;
}

bool is_zero_font_size(std::string_view style) noexcept {
  std::string s;
  s.reserve(style.size());
  for (char c : style) {
    if (!is_html_space(c)) s.push_back(lower_char(c));
  }
  std::size_t pos = 0;
  while ((pos = s.find("font-size:", pos)) != std::string::npos) {
    // Must start a declaration, not be the tail of another property name.
    const bool boundary = pos == 0 || s[pos - 1] == ';' || s[pos - 1] == '{' || s[pos - 1] == '"';
    std::size_t i = pos + 10;
    pos = i;
    if (!boundary) continue;
    bool digit = false;
    bool nonzero = false;
    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) {
      if (s[i] != '.') digit = true;
      if (s[i] >= '1' && s[i] <= '9') nonzero = true;
      ++i;
    }
    if (!digit || nonzero) continue;
    // Any unit (or none), then the end of the declaration.
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    if (i < s.size() && s[i] == '%') ++i;
    if (s.compare(i, 10, "!important") == 0) i += 10;
    if (i == s.size() || s[i] == ';') return true;
  }
  return false;
}

std::string truncate_url(std::string_view url, std::size_t limit) {
  const auto l = layout(url);
  if (!l) return std::string(url);
  std::size_t tokens = l->path_tokens + (l->query ? 1 : 0) + (l->fragment ? 1 : 0);
  std::size_t cut = url.size();
  if (tokens > limit && l->fragment) {
    cut = *l->fragment;
    --tokens;
  }
  if (tokens > limit && l->query) {
    cut = *l->query;
    --tokens;
  }
  if (tokens > limit) {
    // Keep the first `limit` segments: cut at the (limit + 1)-th '/'.
    std::size_t seen = 0;
    for (std::size_t i = l->path_begin; i < l->path_end; ++i) {
      if (url[i] == '/' && seen++ == limit) {
        cut = i;
        break;
      }
    }
  }
  return std::string(url.substr(0, cut));
}

std::size_t url_token_count(std::string_view url) {
  const auto l = layout(url);
  if (!l) return 0;
  return l->path_tokens + (l->query ? 1 : 0) + (l->fragment ? 1 : 0);
}

ReducedBody reduce_html(std::string_view html, std::size_t url_token_limit) {
  const std::string valid = utf8::sanitize(html);
  return Reducer(url_token_limit).run(valid);
}

}  // namespace phishtriage
