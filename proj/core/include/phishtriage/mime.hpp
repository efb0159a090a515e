#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace phishtriage {

enum class TransferEncoding { None, QuotedPrintable, Base64, Other };

struct MimePart {
  std::string content_type = "text/plain";  ///< lower-cased media type
  std::optional<std::string> charset;
  TransferEncoding transfer_encoding = TransferEncoding::None;
  bool attachment = false;  ///< Content-Disposition: attachment
  std::string payload;      ///< raw bytes, still transfer-encoded
};

struct RawEmail {
  /// Header fields in message order, folding already undone.
  std::vector<std::pair<std::string, std::string>> headers;
  /// Leaf parts in document order.
  std::vector<MimePart> parts;

  /// First header with the given name (case-insensitive).
  std::optional<std::string_view> header(std::string_view name) const;
};

/// Tolerant RFC 5322 / MIME parse. Nothing short of empty input fails: lines
/// that are not headers start the body, and a multipart body whose boundary
/// cannot be found becomes a single application/octet-stream part.
/// Throws Error{EmptyInput}.
RawEmail parse_eml(std::string_view raw);

struct SelectedBody {
  bool html = false;
  std::string text;  ///< UTF-8
};

/// Picks the text/html part (falling back to text/plain), undoes the transfer
/// encoding and converts to UTF-8. Returns nullopt when there is no textual
/// part or when a base64 payload does not decode.
std::optional<SelectedBody> select_body(const RawEmail& msg);

/// Decodes a single part's payload the same way select_body does.
std::optional<std::string> decode_part(const MimePart& part);

}  // namespace phishtriage
