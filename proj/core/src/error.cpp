#include "phishtriage/error.hpp"

#include <array>
#include <utility>

namespace phishtriage {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 20> kNames{{
    {ErrorCode::EmptyInput, "EmptyInput"},
    {ErrorCode::UnreadableFile, "UnreadableFile"},
    {ErrorCode::UnknownColumn, "UnknownColumn"},
    {ErrorCode::UnknownLabel, "UnknownLabel"},
    {ErrorCode::RowParse, "RowParse"},
    {ErrorCode::EmptyEmail, "EmptyEmail"},
    {ErrorCode::MalformedPayload, "MalformedPayload"},
    {ErrorCode::SchemaViolation, "SchemaViolation"},
    {ErrorCode::UnknownRisk, "UnknownRisk"},
    {ErrorCode::TransportError, "TransportError"},
    {ErrorCode::AuthError, "AuthError"},
    {ErrorCode::RateLimited, "RateLimited"},
    {ErrorCode::Timeout, "Timeout"},
    {ErrorCode::HttpStatus, "HttpStatus"},
    {ErrorCode::MissingLabel, "MissingLabel"},
    {ErrorCode::EmptyCounts, "EmptyCounts"},
    {ErrorCode::ProviderUnavailable, "ProviderUnavailable"},
    {ErrorCode::QuotaExceeded, "QuotaExceeded"},
    {ErrorCode::InvalidConfig, "InvalidConfig"},
    {ErrorCode::Io, "Io"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name) noexcept {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace phishtriage
