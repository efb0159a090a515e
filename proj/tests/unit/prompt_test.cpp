#include <gtest/gtest.h>

#include "phishtriage/error.hpp"
#include "phishtriage/prompt.hpp"

namespace phishtriage {
namespace {

UniformRecord record(std::string text) {
  UniformRecord r;
  r.email_text = std::move(text);
  return r;
}

ErrorCode parse_error(std::string_view payload) {
  try {
    parse_verdict(payload);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for " << payload;
  return ErrorCode::Io;
}

constexpr const char* kValid =
    R"({"Is_Phishing": true, "Risk": "High", "Social_Engineering_Elements": ["Urgency", "Fake sender"],
        "Actions": ["Do not click", "Report it"], "Reason": "Spoofed domain."})";

TEST(BuildRequest, PersonaPrefix) {
  const auto req = build_request(record("SUBJECT: a, FROM: b, EMAIL: c"));
  EXPECT_EQ(req.system_prompt.rfind(
                "You are a cybersecurity expert specialized in detecting and analyzing phishing emails.", 0),
            0u);
  EXPECT_EQ(req.system_prompt, PromptOptions::default_persona());
}

TEST(BuildRequest, UserContentVerbatim) {
  EXPECT_EQ(build_request(record("SUBJECT: , FROM: , EMAIL: x")).user_content, "SUBJECT: , FROM: , EMAIL: x");
}

TEST(BuildRequest, SchemaHasFiveRequiredFields) {
  const auto req = build_request(record("x"));
  EXPECT_EQ(schema_required_properties(req.output_schema),
            (std::vector<std::string>{"Is_Phishing", "Risk", "Social_Engineering_Elements", "Actions", "Reason"}));
}

TEST(BuildRequest, EmptyEmailRejected) {
  try {
    build_request(record(""));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyEmail);
  }
}

TEST(BuildRequest, Deterministic) {
  const auto a = build_request(record("SUBJECT: a, FROM: b, EMAIL: c"));
  const auto b = build_request(record("SUBJECT: a, FROM: b, EMAIL: c"));
  EXPECT_EQ(a.system_prompt, b.system_prompt);
  EXPECT_EQ(a.user_content, b.user_content);
  EXPECT_EQ(a.output_schema.dump(), b.output_schema.dump());
  EXPECT_EQ(request_content_hash(a), request_content_hash(b));
}

TEST(BuildRequest, UrlContextSlot) {
  PromptOptions opts;
  opts.url_context = "URLs found: 1";
  const auto req = build_request(record("SUBJECT: a, FROM: b, EMAIL: c"), opts);
  EXPECT_EQ(req.user_content, "SUBJECT: a, FROM: b, EMAIL: c\n\nURL ANALYSIS:\nURLs found: 1");
}

TEST(BuildRequest, TruncatesLongEmail) {
  PromptOptions opts;
  opts.max_email_chars = 20;
  const auto req = build_request(record("SUBJECT: a, FROM: b, EMAIL: " + std::string(100, 'z')), opts);
  EXPECT_NE(req.user_content.find("[truncated]"), std::string::npos);
  EXPECT_LT(req.user_content.size(), 60u);
}

TEST(BuildRequest, PromptOnlyEmbedsSchema) {
  PromptOptions opts;
  opts.mode = StructuredMode::PromptOnly;
  const auto req = build_request(record("x"), opts);
  EXPECT_NE(req.system_prompt.find("Social_Engineering_Elements"), std::string::npos);
}

TEST(ParseVerdict, ValidPayload) {
  const Verdict v = parse_verdict(kValid);
  EXPECT_TRUE(v.is_phishing);
  EXPECT_EQ(v.risk, Risk::High);
  EXPECT_EQ(v.social_engineering_elements.size(), 2u);
  EXPECT_EQ(v.actions.size(), 2u);
  EXPECT_EQ(v.reason, "Spoofed domain.");
}

TEST(ParseVerdict, MissingActions) {
  EXPECT_EQ(parse_error(R"({"Is_Phishing": true, "Risk": "High", "Social_Engineering_Elements": [], "Reason": "r"})"),
            ErrorCode::SchemaViolation);
}

TEST(ParseVerdict, RiskCaseFolding) {
  for (const auto& [text, risk] : std::vector<std::pair<std::string, Risk>>{
           {"high", Risk::High}, {"HIGH", Risk::High}, {"Low", Risk::Low}, {"MeDiUm", Risk::Medium},
           {"medium", Risk::Medium}}) {
    const std::string payload = R"({"Is_Phishing": false, "Risk": ")" + text +
                                R"(", "Social_Engineering_Elements": [], "Actions": [], "Reason": ""})";
    EXPECT_EQ(parse_verdict(payload).risk, risk) << text;
  }
}

TEST(ParseVerdict, Errors) {
  EXPECT_EQ(parse_error("not json"), ErrorCode::MalformedPayload);
  EXPECT_EQ(parse_error("[1,2]"), ErrorCode::SchemaViolation);
  EXPECT_EQ(parse_error(R"({"Is_Phishing": "yes", "Risk": "High", "Social_Engineering_Elements": [], "Actions": [], "Reason": ""})"),
            ErrorCode::SchemaViolation);
  EXPECT_EQ(parse_error(R"({"Is_Phishing": true, "Risk": "Severe", "Social_Engineering_Elements": [], "Actions": [], "Reason": ""})"),
            ErrorCode::UnknownRisk);
  EXPECT_EQ(parse_error(R"({"Is_Phishing": true, "Risk": "High", "Social_Engineering_Elements": [1], "Actions": [], "Reason": ""})"),
            ErrorCode::SchemaViolation);
}

TEST(ParseVerdict, CodeFencesTolerated) {
  EXPECT_TRUE(parse_verdict(std::string("```json\n") + kValid + "\n```").is_phishing);
}

TEST(ParseVerdict, RoundTrip) {
  const Verdict v = parse_verdict(kValid);
  const std::string canonical = serialize_verdict(v);
  EXPECT_EQ(parse_verdict(canonical), v);
  EXPECT_EQ(serialize_verdict(parse_verdict(canonical)), canonical);
}

}  // namespace
}  // namespace phishtriage
