#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace phishtriage {

enum class ErrorCode {
  EmptyInput,
  UnreadableFile,
  UnknownColumn,
  UnknownLabel,
  RowParse,
  EmptyEmail,
  MalformedPayload,
  SchemaViolation,
  UnknownRisk,
  TransportError,
  AuthError,
  RateLimited,
  Timeout,
  HttpStatus,
  MissingLabel,
  EmptyCounts,
  ProviderUnavailable,
  QuotaExceeded,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;
std::optional<ErrorCode> error_code_from_string(std::string_view name) noexcept;

/// Library-wide exception. Every failure surfaced by phishtriage carries one of
/// the codes above so callers (and the outcomes file) can categorize it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace phishtriage
