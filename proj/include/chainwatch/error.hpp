#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chainwatch {

enum class ErrorCode {
  Ok = 0,
  MalformedJson,
  MissingField,
  BadTimestamp,
  IoError,
  FormatVersionMismatch,
  EmptyTrainingSet,
  NoModelForLength,
  EmptyPrefixTable,
  TooFewSessions,
  InsufficientData,
  InvalidSpec,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

// Domain failure raised by the core library. The C API maps code() onto its
// status enum one-to-one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace chainwatch
