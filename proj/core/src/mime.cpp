#include "phishtriage/mime.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "phishtriage/encoding.hpp"
#include "phishtriage/error.hpp"

namespace phishtriage {
namespace {

constexpr int kMaxDepth = 16;

using Headers = std::vector<std::pair<std::string, std::string>>;

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) noexcept {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view trim(std::string_view s) noexcept {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<std::string_view> find_header(const Headers& headers, std::string_view name) {
  for (const auto& [k, v] : headers) {
    if (iequals(k, name)) return std::string_view(v);
  }
  return std::nullopt;
}

bool valid_field_name(std::string_view name) noexcept {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u > 32 && u < 127 && c != ':';
  });
}

/// One physical line without its terminator; `next` points past the LF.
std::string_view next_line(std::string_view text, std::size_t pos, std::size_t& next) noexcept {
  const std::size_t nl = text.find('\n', pos);
  std::size_t end = nl == std::string_view::npos ? text.size() : nl;
  next = nl == std::string_view::npos ? text.size() : nl + 1;
  if (end > pos && text[end - 1] == '\r') --end;
  return text.substr(pos, end - pos);
}

/// Splits an entity into unfolded headers and the body that follows them.
std::string_view split_headers(std::string_view entity, Headers& headers) {
  std::size_t pos = 0;
  // An mbox "From " envelope line is not a header.
  if (entity.rfind("From ", 0) == 0) next_line(entity, 0, pos);

  while (pos < entity.size()) {
    std::size_t next = 0;
    const std::string_view line = next_line(entity, pos, next);
    if (line.empty()) return entity.substr(next);
    if ((line.front() == ' ' || line.front() == '\t') && !headers.empty()) {
      auto& value = headers.back().second;
      value.append(" ");
      value.append(trim(line));
      pos = next;
      continue;
    }
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos || !valid_field_name(line.substr(0, colon))) {
      return entity.substr(pos);  // not a header: the body starts here
    }
    headers.emplace_back(std::string(line.substr(0, colon)), std::string(trim(line.substr(colon + 1))));
    pos = next;
  }
  return {};
}

struct MediaType {
  std::string type;
  std::map<std::string, std::string> params;
};

MediaType parse_media_type(std::string_view value) {
  MediaType mt;
  std::size_t pos = value.find(';');
  mt.type = to_lower(trim(value.substr(0, pos)));
  while (pos != std::string_view::npos && pos < value.size()) {
    ++pos;
    const std::size_t eq = value.find('=', pos);
    if (eq == std::string_view::npos) break;
    std::string key = to_lower(trim(value.substr(pos, eq - pos)));
    std::size_t i = eq + 1;
    while (i < value.size() && (value[i] == ' ' || value[i] == '\t')) ++i;
    std::string val;
    if (i < value.size() && value[i] == '"') {
      ++i;
      while (i < value.size() && value[i] != '"') {
        if (value[i] == '\\' && i + 1 < value.size()) ++i;
        val.push_back(value[i++]);
      }
      pos = value.find(';', i);
    } else {
      pos = value.find(';', i);
      val = std::string(trim(value.substr(i, pos == std::string_view::npos ? value.npos : pos - i)));
    }
    if (!key.empty()) mt.params.emplace(std::move(key), std::move(val));
  }
  return mt;
}

TransferEncoding parse_transfer_encoding(std::optional<std::string_view> value) {
  if (!value) return TransferEncoding::None;
  const std::string v = to_lower(trim(*value));
  if (v == "base64") return TransferEncoding::Base64;
  if (v == "quoted-printable") return TransferEncoding::QuotedPrintable;
  if (v.empty() || v == "7bit" || v == "8bit" || v == "binary") return TransferEncoding::None;
  return TransferEncoding::Other;
}

/// Bodies between boundary delimiter lines; empty when no delimiter exists.
std::vector<std::string_view> split_multipart(std::string_view body, std::string_view boundary) {
  const std::string delimiter = "--" + std::string(boundary);
  std::vector<std::string_view> parts;
  std::optional<std::size_t> part_start;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t next = 0;
    const std::string_view line = next_line(body, pos, next);
    if (line.rfind(delimiter, 0) == 0) {
      const std::string_view rest = trim(line.substr(delimiter.size()));
      const bool closing = rest.rfind("--", 0) == 0;
      if (rest.empty() || closing) {
        if (part_start) {
          // The line break before a delimiter belongs to the delimiter.
          std::size_t end = pos;
          if (end > *part_start && body[end - 1] == '\n') --end;
          if (end > *part_start && body[end - 1] == '\r') --end;
          parts.push_back(body.substr(*part_start, end - *part_start));
        }
        if (closing) return parts;
        part_start = next;
      }
    }
    pos = next;
  }
  if (part_start && *part_start <= body.size()) parts.push_back(body.substr(*part_start));
  return parts;
}

MimePart opaque_part(std::string_view body) {
  MimePart part;
  part.content_type = "application/octet-stream";
  part.payload = std::string(body);
  return part;
}

void parse_entity(const Headers& headers, std::string_view body, int depth, std::vector<MimePart>& out) {
  const auto ct = find_header(headers, "Content-Type");
  MediaType mt = ct ? parse_media_type(*ct) : MediaType{};

  if (mt.type.rfind("multipart/", 0) == 0) {
    const auto boundary = mt.params.find("boundary");
    if (depth >= kMaxDepth || boundary == mt.params.end() || boundary->second.empty()) {
      out.push_back(opaque_part(body));
      return;
    }
    const auto children = split_multipart(body, boundary->second);
    if (children.empty()) {
      out.push_back(opaque_part(body));
      return;
    }
    for (const std::string_view child : children) {
      Headers child_headers;
      const std::string_view child_body = split_headers(child, child_headers);
      parse_entity(child_headers, child_body, depth + 1, out);
    }
    return;
  }

  MimePart part;
  if (mt.type.find('/') != std::string::npos) part.content_type = mt.type;
  if (const auto cs = mt.params.find("charset"); cs != mt.params.end() && !cs->second.empty()) {
    part.charset = cs->second;
  }
  part.transfer_encoding = parse_transfer_encoding(find_header(headers, "Content-Transfer-Encoding"));
  if (const auto disp = find_header(headers, "Content-Disposition")) {
    part.attachment = to_lower(trim(*disp)).rfind("attachment", 0) == 0;
  }
  part.payload = std::string(body);
  out.push_back(std::move(part));
}

}  // namespace

std::optional<std::string_view> RawEmail::header(std::string_view name) const {
  return find_header(headers, name);
}

RawEmail parse_eml(std::string_view raw) {
  if (raw.empty()) throw Error(ErrorCode::EmptyInput, "empty message");
  RawEmail msg;
  const std::string_view body = split_headers(raw, msg.headers);
  parse_entity(msg.headers, body, 0, msg.parts);
  return msg;
}

std::optional<std::string> decode_part(const MimePart& part) {
  std::string bytes;
  switch (part.transfer_encoding) {
    case TransferEncoding::Base64: {
      auto decoded = base64_decode(part.payload);
      if (!decoded) return std::nullopt;
      bytes = std::move(*decoded);
      break;
    }
    case TransferEncoding::QuotedPrintable:
      bytes = quoted_printable_decode(part.payload);
      break;
    case TransferEncoding::None:
    case TransferEncoding::Other:
      if (looks_like_base64(part.payload)) {
        auto decoded = base64_decode(part.payload);
        if (!decoded) return std::nullopt;
        bytes = std::move(*decoded);
      } else {
        bytes = part.payload;
      }
      break;
  }
  return to_utf8(bytes, part.charset.value_or(""));
}

std::optional<SelectedBody> select_body(const RawEmail& msg) {
  const auto pick = [&](std::string_view type) -> const MimePart* {
    for (const auto& part : msg.parts) {
      if (!part.attachment && part.content_type == type) return &part;
    }
    return nullptr;
  };
  const MimePart* part = pick("text/html");
  const bool html = part != nullptr;
  if (!part) part = pick("text/plain");
  if (!part) return std::nullopt;
  auto text = decode_part(*part);
  if (!text) return std::nullopt;
  return SelectedBody{html, std::move(*text)};
}

}  // namespace phishtriage
