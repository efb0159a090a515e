#include "phishtriage/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

#include <nlohmann/json.hpp>

#include "phishtriage/csv.hpp"
#include "phishtriage/embedded_data.hpp"
#include "phishtriage/encoding.hpp"
#include "phishtriage/error.hpp"
#include "phishtriage/fs_util.hpp"
#include "phishtriage/hash.hpp"
#include "phishtriage/mime.hpp"

namespace phishtriage {
namespace {

constexpr std::string_view kSubjectPrefix = "SUBJECT: ";
constexpr std::string_view kFromDelimiter = ", FROM: ";
constexpr std::string_view kEmailDelimiter = ", EMAIL: ";

std::string normalize_key(std::string_view raw) {
  std::size_t b = 0;
  std::size_t e = raw.size();
  while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string out;
  bool space = false;
  for (std::size_t i = b; i < e; ++i) {
    const auto c = static_cast<unsigned char>(raw[i]);
    if (std::isspace(c)) {
      space = true;
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

/// Fields of one tabular row, looked up by column name.
using FieldGetter = std::function<std::optional<std::string>(const std::string&)>;

std::optional<EmailRecord> build_row_record(const FieldGetter& get, const ColumnMapping& mapping,
                                            const LabelSynonyms& synonyms, std::string_view source,
                                            std::string_view row_identity, std::string& failure) {
  EmailRecord rec;
  rec.source = std::string(source);
  const auto field = [&](const std::optional<std::string>& column) -> std::string {
    if (!column) return {};
    return get(*column).value_or(std::string{});
  };
  rec.subject = field(mapping.subject);
  rec.sender = field(mapping.sender);
  const std::string body = field(mapping.body);
  if (body.empty()) {
    rec.null_body = true;
  } else if (looks_like_html(body)) {
    rec.body_html = body;
  } else {
    rec.body_text = body;
  }
  if (mapping.label) {
    const std::string raw_label = field(mapping.label);
    if (!normalize_key(raw_label).empty()) {
      rec.label = synonyms.lookup(raw_label);
      if (!rec.label) {
        failure = "unknown label '" + raw_label + "'";
        return std::nullopt;
      }
    }
  }
  const std::string explicit_id = field(mapping.id);
  rec.id = explicit_id.empty() ? content_id(row_identity, source) : explicit_id;
  return rec;
}

void check_columns(const ColumnMapping& mapping, const std::set<std::string, std::less<>>& available) {
  for (const auto* column : {&mapping.id, &mapping.subject, &mapping.sender, &mapping.body, &mapping.label}) {
    if (*column && !available.contains(**column)) {
      throw Error(ErrorCode::UnknownColumn, "column '" + **column + "' not present in dataset");
    }
  }
}

DatasetLoad parse_csv_dataset(std::string_view content, const ColumnMapping& mapping,
                              const LabelSynonyms& synonyms, std::string_view source) {
  DatasetLoad load;
  const auto rows = csv::parse(content);
  if (rows.empty()) {
    check_columns(mapping, {});
    return load;
  }
  const auto& header = rows.front();
  std::set<std::string, std::less<>> available;
  for (const auto& h : header) available.insert(trimmed(h));
  check_columns(mapping, available);

  for (std::size_t r = 1; r < rows.size(); ++r) {
    ++load.rows;
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      load.failures.push_back({r, "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(row.size())});
      continue;
    }
    const FieldGetter get = [&](const std::string& column) -> std::optional<std::string> {
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (trimmed(header[c]) == column) return row[c];
      }
      return std::nullopt;
    };
    std::string failure;
    if (auto rec = build_row_record(get, mapping, synonyms, source, csv::format_row(row), failure)) {
      load.records.push_back(std::move(*rec));
    } else {
      load.failures.push_back({r, failure});
    }
  }
  return load;
}

std::optional<std::string> json_scalar(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_null()) return std::string{};
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_number()) return value.dump();
  return std::nullopt;
}

DatasetLoad parse_json_dataset(std::string_view content, const ColumnMapping& mapping,
                               const LabelSynonyms& synonyms, std::string_view source) {
  DatasetLoad load;
  const auto doc = nlohmann::json::parse(content, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw Error(ErrorCode::UnreadableFile, "JSON dataset must be an array of objects");
  }
  std::set<std::string, std::less<>> available;
  for (const auto& item : doc) {
    if (!item.is_object()) continue;
    for (const auto& [k, v] : item.items()) available.insert(k);
  }
  if (!doc.empty()) check_columns(mapping, available);

  std::size_t r = 0;
  for (const auto& item : doc) {
    ++r;
    ++load.rows;
    if (!item.is_object()) {
      load.failures.push_back({r, "row is not an object"});
      continue;
    }
    std::string bad_field;
    const FieldGetter get = [&](const std::string& column) -> std::optional<std::string> {
      const auto it = item.find(column);
      if (it == item.end()) return std::nullopt;
      auto value = json_scalar(*it);
      if (!value) bad_field = column;
      return value;
    };
    std::string failure;
    auto rec = build_row_record(get, mapping, synonyms, source, item.dump(), failure);
    if (!bad_field.empty()) {
      load.failures.push_back({r, "field '" + bad_field + "' is not a scalar"});
    } else if (rec) {
      load.records.push_back(std::move(*rec));
    } else {
      load.failures.push_back({r, failure});
    }
  }
  return load;
}

}  // namespace

std::string_view to_string(Label label) noexcept {
  return label == Label::Phishing ? "Phishing" : "Legit";
}

std::optional<Label> label_from_string(std::string_view text) noexcept {
  if (text == "Phishing") return Label::Phishing;
  if (text == "Legit") return Label::Legit;
  return std::nullopt;
}

LabelSynonyms LabelSynonyms::parse(std::string_view text) {
  LabelSynonyms table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (normalize_key(line).empty()) continue;
    const auto eq = line.find('=');
    const auto label = eq == std::string_view::npos ? std::nullopt : label_from_string(trimmed(line.substr(eq + 1)));
    if (!label || normalize_key(line.substr(0, eq)).empty()) {
      throw Error(ErrorCode::InvalidConfig, "label synonyms line " + std::to_string(line_no) +
                                                ": expected '<label> = Phishing|Legit'");
    }
    table.add(line.substr(0, eq), *label);
  }
  return table;
}

const LabelSynonyms& LabelSynonyms::defaults() {
  static const LabelSynonyms table = parse(embedded::label_synonyms());
  return table;
}

void LabelSynonyms::add(std::string_view synonym, Label label) {
  table_[normalize_key(synonym)] = label;
}

std::optional<Label> LabelSynonyms::lookup(std::string_view raw) const {
  const auto it = table_.find(normalize_key(raw));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::string_view UniformRecord::body() const noexcept {
  if (body_offset > email_text.size()) return {};
  return std::string_view(email_text).substr(body_offset);
}

UniformRecord normalize_record(const EmailRecord& rec, std::string_view body) {
  UniformRecord out;
  out.id = rec.id;
  out.label = rec.label;
  out.source = rec.source;
  out.email_text.reserve(kSubjectPrefix.size() + rec.subject.size() + kFromDelimiter.size() +
                         rec.sender.size() + kEmailDelimiter.size() + body.size());
  out.email_text.append(kSubjectPrefix).append(rec.subject);
  out.email_text.append(kFromDelimiter).append(rec.sender);
  out.email_text.append(kEmailDelimiter);
  out.body_offset = out.email_text.size();
  out.email_text.append(body);
  return out;
}

EmailRecord record_from_eml(std::string_view raw, std::string_view source) {
  const RawEmail msg = parse_eml(raw);
  EmailRecord rec;
  rec.id = content_id(raw, source);
  rec.source = std::string(source);
  if (const auto subject = msg.header("Subject")) rec.subject = decode_header_words(*subject);
  if (const auto from = msg.header("From")) rec.sender = decode_header_words(*from);
  if (auto body = select_body(msg); body && !body->text.empty()) {
    (body->html ? rec.body_html : rec.body_text) = std::move(body->text);
  } else {
    rec.null_body = true;
  }
  return rec;
}

DatasetLoad parse_tabular_dataset(std::string_view content, TabularFormat format,
                                  const ColumnMapping& mapping, const LabelSynonyms& synonyms,
                                  std::string_view source) {
  return format == TabularFormat::Csv ? parse_csv_dataset(content, mapping, synonyms, source)
                                      : parse_json_dataset(content, mapping, synonyms, source);
}

DatasetLoad load_tabular_dataset(const std::filesystem::path& path, TabularFormat format,
                                 const ColumnMapping& mapping, const LabelSynonyms& synonyms,
                                 std::string_view source) {
  const std::string content = read_file(path);
  const std::string tag = source.empty() ? path.filename().string() : std::string(source);
  return parse_tabular_dataset(content, format, mapping, synonyms, tag);
}

bool looks_like_html(std::string_view body) noexcept {
  static constexpr std::string_view kMarkers[] = {"<html", "<body", "<div", "<p>",   "<p ",
                                                  "<a ",   "<br",   "<table", "<span", "<img",
                                                  "<font", "<td",   "<!doctype"};
  std::string lowered;
  lowered.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(body[i]))));
  }
  for (const auto marker : kMarkers) {
    if (lowered.find(marker) != std::string::npos) return true;
  }
  return false;
}

}  // namespace phishtriage
