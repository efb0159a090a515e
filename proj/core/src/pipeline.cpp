#include "phishtriage/pipeline.hpp"

#include <regex>

#include "phishtriage/encoding.hpp"

namespace phishtriage {
namespace {

/// Undeclared base64 bodies (tabular sources) are decoded here; a body that
/// sniffs as base64 but fails to decode is treated as missing.
std::optional<std::string> undo_base64(const std::string& body) {
  if (!looks_like_base64(body)) return body;
  auto decoded = base64_decode(body);
  if (!decoded) return std::nullopt;
  return to_utf8(*decoded, "");
}

/// Tabular sources often carry HTML in a column with no declared type.
bool looks_like_html(const std::string& body) {
  static const std::regex tag(R"(<(html|body|head|div|p|a|b|i|u|br|table|tr|td|span|img|font|strong|em|center|!doctype)[\s>/])",
                              std::regex::icase);
  return std::regex_search(body, tag);
}

}  // namespace

PreparedEmail prepare_email(const EmailRecord& rec, const PipelineOptions& options) {
  const CodepointRanges& emoji = options.emoji ? *options.emoji : CodepointRanges::emoji_defaults();
  PreparedEmail out;

  std::optional<std::string> body;
  bool html = false;
  if (!rec.null_body) {
    if (rec.body_html) {
      body = undo_base64(*rec.body_html);
      html = true;
    } else if (rec.body_text) {
      body = undo_base64(*rec.body_text);
      html = body && looks_like_html(*body);
    }
  }

  std::string cleaned;
  if (body) {
    if (html) {
      out.reduced = reduce_html(*body, options.url_token_limit);
      cleaned = clean_text(out.reduced.text, emoji);
    } else {
      cleaned = clean_text(*body, emoji);
      out.reduced.text = cleaned;
    }
  }
  out.null_body = cleaned.empty();

  EmailRecord header_clean = rec;
  header_clean.subject = clean_text(rec.subject, emoji);
  header_clean.sender = clean_text(rec.sender, emoji);
  out.record = normalize_record(header_clean, cleaned);
  return out;
}

}  // namespace phishtriage
