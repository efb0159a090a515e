#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "phishtriage/dataset.hpp"

namespace phishtriage {

enum class Risk { High, Medium, Low };

std::string_view to_string(Risk risk) noexcept;
/// Case-insensitive, surrounding whitespace ignored.
std::optional<Risk> risk_from_string(std::string_view text) noexcept;

struct Verdict {
  bool is_phishing = false;
  Risk risk = Risk::Low;
  std::vector<std::string> social_engineering_elements;
  std::vector<std::string> actions;
  std::string reason;

  bool operator==(const Verdict&) const = default;
};

/// How the verdict schema reaches the model.
enum class StructuredMode {
  ResponseFormat,  ///< response_format: json_schema (strict)
  ToolCall,        ///< a single forced function call
  PromptOnly,      ///< schema appended to the system prompt
};

std::string_view to_string(StructuredMode mode) noexcept;
std::optional<StructuredMode> structured_mode_from_string(std::string_view text) noexcept;

struct PromptOptions {
  std::string persona = default_persona();
  StructuredMode mode = StructuredMode::ResponseFormat;
  /// Appended under "URL ANALYSIS:" when set.
  std::optional<std::string> url_context;
  /// Budget for the email text in code points; the tail of the body is cut
  /// and marked "[truncated]" beyond it. 0 disables the cap.
  std::size_t max_email_chars = 0;

  static std::string default_persona();
};

struct ClassificationRequest {
  std::string system_prompt;
  std::string user_content;
  nlohmann::json output_schema;
};

inline constexpr std::string_view kUrlAnalysisHeading = "URL ANALYSIS:";
inline constexpr std::string_view kTruncatedMarker = "[truncated]";

/// JSON schema of the five-field verdict; every property is required.
const nlohmann::json& verdict_schema();

/// Names listed under "required" in verdict_schema(), in declaration order.
std::vector<std::string> schema_required_properties(const nlohmann::json& schema);

/// Throws Error{EmptyEmail} when the record's email_text is empty.
ClassificationRequest build_request(const UniformRecord& rec, const PromptOptions& options = {});

/// Digest identifying a request's content (system prompt + user content).
/// The mock endpoint keys its fixtures on the same value.
std::string request_content_hash(std::string_view system_prompt, std::string_view user_content);
std::string request_content_hash(const ClassificationRequest& req);

/// Strict parse of a structured-output payload. Markdown code fences around
/// the object are tolerated; unknown extra members are ignored.
/// Throws Error{MalformedPayload}, Error{SchemaViolation}, Error{UnknownRisk}.
Verdict parse_verdict(std::string_view payload);

nlohmann::json verdict_to_json(const Verdict& verdict);
/// Canonical compact serialization (fixed member order).
std::string serialize_verdict(const Verdict& verdict);

}  // namespace phishtriage
