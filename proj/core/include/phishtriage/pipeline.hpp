#pragma once

#include <cstddef>

#include "phishtriage/dataset.hpp"
#include "phishtriage/html_reducer.hpp"
#include "phishtriage/text_cleaner.hpp"

namespace phishtriage {

struct PipelineOptions {
  const CodepointRanges* emoji = &CodepointRanges::emoji_defaults();
  std::size_t url_token_limit = kDefaultUrlTokenLimit;
};

struct PreparedEmail {
  UniformRecord record;
  ReducedBody reduced;  ///< for plain-text bodies: text only, no links
  bool null_body = false;
};

/// Body reduction and cleaning in order: base64 sniffing for undeclared
/// payloads, HTML reduction, clean_text, then normalize_record. Subject and
/// sender go through clean_text as well.
PreparedEmail prepare_email(const EmailRecord& rec, const PipelineOptions& options = {});

}  // namespace phishtriage
