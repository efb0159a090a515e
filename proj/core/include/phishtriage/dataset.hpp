#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phishtriage {

enum class Label { Phishing, Legit };

std::string_view to_string(Label label) noexcept;
/// Accepts exactly "Phishing" or "Legit".
std::optional<Label> label_from_string(std::string_view text) noexcept;

/// Maps heterogeneous dataset labels ("spam", "ham", "fraud", ...) onto the two
/// standardized classes. Keys are matched case-insensitively after trimming.
class LabelSynonyms {
 public:
  LabelSynonyms() = default;

  /// Parses "label = Phishing|Legit" lines; '#' starts a comment.
  /// Throws Error{InvalidConfig}.
  static LabelSynonyms parse(std::string_view text);
  static const LabelSynonyms& defaults();

  void add(std::string_view synonym, Label label);
  std::optional<Label> lookup(std::string_view raw) const;

 private:
  std::map<std::string, Label, std::less<>> table_;
};

struct EmailRecord {
  std::string id;
  std::string subject;
  std::string sender;
  std::optional<std::string> body_text;
  std::optional<std::string> body_html;
  std::optional<Label> label;
  std::string source;
  bool null_body = false;  ///< no decodable body was found
};

/// The two-column normalized form: "SUBJECT: ..., FROM: ..., EMAIL: ..." plus class.
struct UniformRecord {
  std::string id;
  std::string email_text;
  std::optional<Label> label;
  std::string source;
  /// Byte offset of the body inside email_text; email_text itself is opaque
  /// and never re-split.
  std::size_t body_offset = 0;

  std::string_view body() const noexcept;
};

UniformRecord normalize_record(const EmailRecord& rec, std::string_view body);

/// Builds a record from a raw .eml: decoded Subject/From plus the selected body.
/// Throws Error{EmptyInput}.
EmailRecord record_from_eml(std::string_view raw, std::string_view source);

enum class TabularFormat { Csv, Json };

/// Which source column feeds which record field. Unset fields are left empty.
struct ColumnMapping {
  std::optional<std::string> id;
  std::optional<std::string> subject;
  std::optional<std::string> sender;
  std::optional<std::string> body;
  std::optional<std::string> label;
};

struct RowFailure {
  std::size_t row = 0;  ///< 1-based data row (header excluded)
  std::string message;
};

struct DatasetLoad {
  std::vector<EmailRecord> records;
  std::vector<RowFailure> failures;
  std::size_t rows = 0;
};

/// Loads a CSV (first row headers) or JSON (array of flat objects) dataset.
/// Throws Error{UnreadableFile} or Error{UnknownColumn}; bad rows (unknown
/// label, wrong shape) are collected in `failures`.
DatasetLoad load_tabular_dataset(const std::filesystem::path& path, TabularFormat format,
                                 const ColumnMapping& mapping,
                                 const LabelSynonyms& synonyms = LabelSynonyms::defaults(),
                                 std::string_view source = {});

/// Same as load_tabular_dataset over in-memory content.
DatasetLoad parse_tabular_dataset(std::string_view content, TabularFormat format,
                                  const ColumnMapping& mapping,
                                  const LabelSynonyms& synonyms = LabelSynonyms::defaults(),
                                  std::string_view source = {});

/// Rough markup sniff used to route tabular bodies to the HTML reducer.
bool looks_like_html(std::string_view body) noexcept;

}  // namespace phishtriage
