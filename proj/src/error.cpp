#include "chainwatch/error.hpp"

namespace chainwatch {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "ok";
    case ErrorCode::MalformedJson: return "malformed JSON";
    case ErrorCode::MissingField: return "missing field";
    case ErrorCode::BadTimestamp: return "bad timestamp";
    case ErrorCode::IoError: return "I/O error";
    case ErrorCode::FormatVersionMismatch: return "format version mismatch";
    case ErrorCode::EmptyTrainingSet: return "empty training set";
    case ErrorCode::NoModelForLength: return "no model for length";
    case ErrorCode::EmptyPrefixTable: return "empty prefix table";
    case ErrorCode::TooFewSessions: return "too few sessions";
    case ErrorCode::InsufficientData: return "insufficient data";
    case ErrorCode::InvalidSpec: return "invalid generator spec";
    case ErrorCode::InvalidArgument: return "invalid argument";
  }
  return "unknown error";
}

}  // namespace chainwatch
