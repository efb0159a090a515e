#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "phishtriage/dataset.hpp"

namespace phishtriage {

/// Two-column form with header "Email,Class"; unlabeled rows leave Class empty.
std::string write_corpus_csv(const std::vector<UniformRecord>& records);

/// One JSON object per line: id, source, email, class, body_offset.
std::string write_corpus_jsonl(const std::vector<UniformRecord>& records);

std::vector<UniformRecord> parse_corpus_csv(std::string_view text);
std::vector<UniformRecord> parse_corpus_jsonl(std::string_view text);

/// Dispatches on extension (.csv, otherwise JSON lines).
/// Throws Error{UnreadableFile} / Error{MalformedPayload}.
std::vector<UniformRecord> read_corpus(const std::filesystem::path& path);

}  // namespace phishtriage
