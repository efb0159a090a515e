#include "phishtriage/corpus_io.hpp"

#include <nlohmann/json.hpp>

#include "phishtriage/csv.hpp"
#include "phishtriage/error.hpp"
#include "phishtriage/fs_util.hpp"
#include "phishtriage/hash.hpp"

namespace phishtriage {
namespace {

constexpr std::string_view kFromDelimiter = ", FROM: ";
constexpr std::string_view kEmailDelimiter = ", EMAIL: ";

/// Body offset for a record read back without one: the first ", EMAIL: "
/// after the first ", FROM: ".
std::size_t infer_body_offset(std::string_view email_text) {
  const std::size_t from = email_text.find(kFromDelimiter);
  const std::size_t start = from == std::string_view::npos ? 0 : from + kFromDelimiter.size();
  const std::size_t email = email_text.find(kEmailDelimiter, start);
  return email == std::string_view::npos ? email_text.size() : email + kEmailDelimiter.size();
}

std::optional<Label> parse_class(std::string_view value, std::size_t line) {
  if (value.empty()) return std::nullopt;
  if (auto label = label_from_string(value)) return label;
  throw Error(ErrorCode::MalformedPayload,
              "corpus line " + std::to_string(line) + ": class must be Phishing or Legit");
}

}  // namespace

std::string write_corpus_csv(const std::vector<UniformRecord>& records) {
  std::string out = "Email,Class\n";
  for (const auto& r : records) {
    out += csv::format_row({r.email_text, r.label ? std::string(to_string(*r.label)) : std::string{}});
    out.push_back('\n');
  }
  return out;
}

std::string write_corpus_jsonl(const std::vector<UniformRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json line = {{"id", r.id},
                           {"source", r.source},
                           {"email", r.email_text},
                           {"class", r.label ? nlohmann::json(to_string(*r.label)) : nlohmann::json()},
                           {"body_offset", r.body_offset}};
    out += line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

std::vector<UniformRecord> parse_corpus_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  std::vector<UniformRecord> out;
  if (rows.empty()) return out;
  const auto& header = rows.front();
  if (header.size() < 2 || header[0] != "Email" || header[1] != "Class") {
    throw Error(ErrorCode::MalformedPayload, "corpus CSV must start with header Email,Class");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != header.size()) {
      throw Error(ErrorCode::MalformedPayload, "corpus CSV row " + std::to_string(i) + " has wrong field count");
    }
    UniformRecord rec;
    rec.email_text = row[0];
    rec.label = parse_class(row[1], i + 1);
    rec.id = content_id(rec.email_text, "corpus");
    rec.body_offset = infer_body_offset(rec.email_text);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<UniformRecord> parse_corpus_jsonl(std::string_view text) {
  std::vector<UniformRecord> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("email") || !j["email"].is_string()) {
      throw Error(ErrorCode::MalformedPayload, "corpus line " + std::to_string(line_no) + " is not a record");
    }
    UniformRecord rec;
    rec.email_text = j["email"].get<std::string>();
    rec.id = j.value("id", std::string{});
    if (rec.id.empty()) rec.id = content_id(rec.email_text, "corpus");
    rec.source = j.value("source", std::string{});
    if (j.contains("class") && j["class"].is_string()) rec.label = parse_class(j["class"].get<std::string>(), line_no);
    if (j.contains("body_offset") && j["body_offset"].is_number_unsigned() &&
        j["body_offset"].get<std::size_t>() <= rec.email_text.size()) {
      rec.body_offset = j["body_offset"].get<std::size_t>();
    } else {
      rec.body_offset = infer_body_offset(rec.email_text);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<UniformRecord> read_corpus(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  if (path.extension() == ".csv") return parse_corpus_csv(content);
  return parse_corpus_jsonl(content);
}

}  // namespace phishtriage
