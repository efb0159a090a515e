#include "phishtriage/prompt.hpp"

#include <algorithm>
#include <cctype>

#include "phishtriage/embedded_data.hpp"
#include "phishtriage/error.hpp"
#include "phishtriage/hash.hpp"
#include "phishtriage/utf8.hpp"

namespace phishtriage {
namespace {

using nlohmann::json;

constexpr const char* kFields[] = {"Is_Phishing", "Risk", "Social_Engineering_Elements", "Actions", "Reason"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

/// Strips a surrounding ``` / ```json fence.
std::string_view strip_fences(std::string_view payload) {
  payload = trim(payload);
  if (payload.rfind("```", 0) != 0) return payload;
  const std::size_t first_nl = payload.find('\n');
  if (first_nl == std::string_view::npos) return payload;
  std::string_view inner = payload.substr(first_nl + 1);
  inner = trim(inner);
  if (inner.size() >= 3 && inner.substr(inner.size() - 3) == "```") inner.remove_suffix(3);
  return trim(inner);
}

std::vector<std::string> text_list(const json& obj, const char* field) {
  const auto& value = obj.at(field);
  if (!value.is_array()) throw Error(ErrorCode::SchemaViolation, std::string(field) + " must be a list");
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const auto& item : value) {
    if (!item.is_string()) throw Error(ErrorCode::SchemaViolation, std::string(field) + " must contain only text");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string cap_email(std::string_view email_text, std::size_t max_chars) {
  if (max_chars == 0 || utf8::codepoint_count(email_text) <= max_chars) return std::string(email_text);
  const std::size_t marker = kTruncatedMarker.size() + 1;
  const std::size_t keep = max_chars > marker ? max_chars - marker : 0;
  std::string out(utf8::prefix_codepoints(email_text, keep));
  out.push_back(' ');
  out.append(kTruncatedMarker);
  return out;
}

}  // namespace

std::string_view to_string(Risk risk) noexcept {
  switch (risk) {
    case Risk::High:
      return "High";
    case Risk::Medium:
      return "Medium";
    case Risk::Low:
      return "Low";
  }
  return "Low";
}

std::optional<Risk> risk_from_string(std::string_view text) noexcept {
  std::string v;
  for (char c : trim(text)) v.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (v == "high") return Risk::High;
  if (v == "medium") return Risk::Medium;
  if (v == "low") return Risk::Low;
  return std::nullopt;
}

std::string_view to_string(StructuredMode mode) noexcept {
  switch (mode) {
    case StructuredMode::ResponseFormat:
      return "response_format";
    case StructuredMode::ToolCall:
      return "tool_call";
    case StructuredMode::PromptOnly:
      return "prompt_only";
  }
  return "response_format";
}

std::optional<StructuredMode> structured_mode_from_string(std::string_view text) noexcept {
  const std::string v = lower(trim(text));
  if (v == "response_format") return StructuredMode::ResponseFormat;
  if (v == "tool_call") return StructuredMode::ToolCall;
  if (v == "prompt_only") return StructuredMode::PromptOnly;
  return std::nullopt;
}

std::string PromptOptions::default_persona() { return std::string(embedded::persona_prompt()); }

const json& verdict_schema() {
  static const json schema = [] {
    json properties = json::object();
    properties["Is_Phishing"] = {{"type", "boolean"}, {"description", "An email is phishing or not"}};
    properties["Risk"] = {{"type", "string"},
                          {"enum", {"High", "Medium", "Low"}},
                          {"description", "Categories as High, Medium, and Low"}};
    properties["Social_Engineering_Elements"] = {
        {"type", "array"},
        {"items", {{"type", "string"}}},
        {"description", "A collection of social engineering elements from the email"}};
    properties["Actions"] = {{"type", "array"},
                             {"items", {{"type", "string"}}},
                             {"description", "A collection of recommended action"}};
    properties["Reason"] = {{"type", "string"}, {"description", "A brief reason why this email is phishing"}};
    json required = json::array();
    for (const char* f : kFields) required.push_back(f);
    return json{{"type", "object"},
                {"properties", std::move(properties)},
                {"required", std::move(required)},
                {"additionalProperties", false}};
  }();
  return schema;
}

std::vector<std::string> schema_required_properties(const json& schema) {
  std::vector<std::string> out;
  if (!schema.contains("required") || !schema["required"].is_array()) return out;
  for (const auto& name : schema["required"]) {
    if (name.is_string()) out.push_back(name.get<std::string>());
  }
  return out;
}

ClassificationRequest build_request(const UniformRecord& rec, const PromptOptions& options) {
  if (rec.email_text.empty()) throw Error(ErrorCode::EmptyEmail, "record " + rec.id + " has no email text");
  ClassificationRequest req;
  req.output_schema = verdict_schema();
  req.system_prompt = options.persona;
  if (options.mode == StructuredMode::PromptOnly) {
    req.system_prompt +=
        "\n\nRespond with a single JSON object and nothing else. It must match this JSON schema:\n";
    req.system_prompt += req.output_schema.dump(2);
  }
  req.user_content = cap_email(rec.email_text, options.max_email_chars);
  if (options.url_context && !options.url_context->empty()) {
    req.user_content += "\n\n";
    req.user_content += kUrlAnalysisHeading;
    req.user_content += "\n";
    req.user_content += *options.url_context;
  }
  return req;
}

std::string request_content_hash(std::string_view system_prompt, std::string_view user_content) {
  const json canonical = {{"system", system_prompt}, {"user", user_content}};
  return sha256_hex(canonical.dump(-1, ' ', false, json::error_handler_t::replace));
}

std::string request_content_hash(const ClassificationRequest& req) {
  return request_content_hash(req.system_prompt, req.user_content);
}

Verdict parse_verdict(std::string_view payload) {
  const std::string_view body = strip_fences(payload);
  const json obj = json::parse(body, nullptr, false);
  if (obj.is_discarded()) throw Error(ErrorCode::MalformedPayload, "verdict payload is not JSON");
  if (!obj.is_object()) throw Error(ErrorCode::SchemaViolation, "verdict payload must be a JSON object");
  for (const char* field : kFields) {
    if (!obj.contains(field)) throw Error(ErrorCode::SchemaViolation, std::string("missing field ") + field);
  }
  Verdict v;
  if (!obj["Is_Phishing"].is_boolean()) throw Error(ErrorCode::SchemaViolation, "Is_Phishing must be a boolean");
  v.is_phishing = obj["Is_Phishing"].get<bool>();
  if (!obj["Risk"].is_string()) throw Error(ErrorCode::SchemaViolation, "Risk must be a string");
  const std::string risk = obj["Risk"].get<std::string>();
  const auto tier = risk_from_string(risk);
  if (!tier) throw Error(ErrorCode::UnknownRisk, "Risk '" + risk + "' is not High, Medium or Low");
  v.risk = *tier;
  v.social_engineering_elements = text_list(obj, "Social_Engineering_Elements");
  v.actions = text_list(obj, "Actions");
  if (!obj["Reason"].is_string()) throw Error(ErrorCode::SchemaViolation, "Reason must be a string");
  v.reason = obj["Reason"].get<std::string>();
  return v;
}

json verdict_to_json(const Verdict& verdict) {
  // nlohmann::json objects are key-sorted; the dump below is therefore
  // canonical regardless of insertion order.
  return json{{"Is_Phishing", verdict.is_phishing},
              {"Risk", to_string(verdict.risk)},
              {"Social_Engineering_Elements", verdict.social_engineering_elements},
              {"Actions", verdict.actions},
              {"Reason", verdict.reason}};
}

std::string serialize_verdict(const Verdict& verdict) {
  return verdict_to_json(verdict).dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace phishtriage
