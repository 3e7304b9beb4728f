#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chainwatch/error.hpp"
#include "chainwatch/timestamp.hpp"

namespace chainwatch {

inline constexpr std::string_view kCommandInputEvent = "cowrie.command.input";

/// One parsed honeypot log record.
struct CowrieEvent {
  std::string event_id;
  Timestamp timestamp;
  std::string message;
  std::string source_ip;
  std::string session_id;
  std::string sensor;
  // Set iff event_id == "cowrie.command.input".
  std::optional<std::string> command;
  // Position in the ingest stream; breaks timestamp ties when grouping.
  std::uint64_t sequence = 0;

  bool is_command() const { return event_id == kCommandInputEvent; }

  bool operator==(const CowrieEvent&) const = default;
};

/// A log line exactly as received, before any parsing.
struct RawDocument {
  std::string payload;
  std::string type_tag;
  std::string origin;
  Timestamp received_at;

  bool operator==(const RawDocument&) const = default;
};

struct ParseError {
  ErrorCode code = ErrorCode::MalformedJson;
  std::size_t line = 0;
  std::string reason;
};

using ParseResult = std::variant<CowrieEvent, ParseError>;

RawDocument wrap_raw(std::string_view line, std::string origin, Timestamp now);

/// Parses one JSON-lines record. `line_no` is only used to address errors.
ParseResult parse_event(std::string_view line, std::size_t line_no = 0);

/// Re-serializes the known fields in Cowrie's key names.
std::string serialize_event(const CowrieEvent& event);

std::vector<CowrieEvent> filter_command_events(std::vector<CowrieEvent> events);

/// Reads newline-delimited records from a file or standard input ("-").
/// Gzip input is recognised by its magic bytes and inflated transparently.
class LineSource {
 public:
  static std::unique_ptr<LineSource> open(const std::string& path);

  virtual ~LineSource() = default;

  /// Next line without its terminating '\n' (a trailing '\r' is kept).
  virtual bool next(std::string& line) = 0;

  const std::string& name() const { return name_; }

 protected:
  explicit LineSource(std::string name) : name_(std::move(name)) {}

 private:
  std::string name_;
};

struct Diagnostic {
  std::string origin;
  std::size_t line = 0;
  ErrorCode code = ErrorCode::MalformedJson;
  std::string reason;

  std::string to_string() const;  // "file:line: reason"
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t events = 0;
  std::size_t command_events = 0;
  std::size_t errors = 0;
};

using DiagnosticSink = std::function<void(const Diagnostic&)>;

/// Streams one source through wrap_raw -> parse_event. Every parsed event is
/// returned (not only commands); `next_sequence` is advanced per event so
/// sequence numbers stay unique across several sources.
std::vector<CowrieEvent> read_events(LineSource& source,
                                     std::uint64_t& next_sequence,
                                     IngestStats& stats,
                                     const DiagnosticSink& on_error = {});

}  // namespace chainwatch
