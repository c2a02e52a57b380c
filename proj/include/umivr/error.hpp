#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace umivr {

enum class ErrorCode {
  ZeroVector,
  DimensionMismatch,
  EmptyIndex,
  DuplicateId,
  UnknownId,
  Io,
  FormatVersionMismatch,
  EmptyInput,
  TooFewScores,
  LengthMismatch,
  NotADistribution,
  FrameTooSmall,
  EmptyVideo,
  TooFewPoints,
  UnboundPlaceholder,
  BackendTimeout,
  BackendRefusal,
  BackendFailure,
  ParseFailure,
  EmptyGeneration,
  EmptyQuery,
  WrongStatus,
  MissingAnswer,
  RoundOutOfRange,
  MissingTarget,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code. The
// HTTP layer and the CLI map codes onto status codes / exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ParseFailure keeps the raw backend text so callers can inspect it.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string raw)
      : Error(ErrorCode::ParseFailure, message), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

}  // namespace umivr
