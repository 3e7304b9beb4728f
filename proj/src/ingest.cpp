#include "chainwatch/ingest.hpp"

#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include "json.hpp"

namespace chainwatch {
namespace {

using nlohmann::json;

ParseError make_error(ErrorCode code, std::size_t line, std::string reason) {
  return ParseError{code, line, std::move(reason)};
}

const json* find_string(const json& object, std::string_view key) {
  const auto it = object.find(key);
  if (it == object.end() || !it->is_string()) return nullptr;
  return &*it;
}

std::string text_field(const json& object, std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    const auto it = object.find(key);
    if (it == object.end() || it->is_null()) continue;
    return it->is_string() ? it->get<std::string>() : it->dump();
  }
  return {};
}

std::string strip_trailing_newline(std::string text) {
  if (!text.empty() && text.back() == '\n') {
    text.pop_back();
    if (!text.empty() && text.back() == '\r') text.pop_back();
  }
  return text;
}

class GzLineSource final : public LineSource {
 public:
  GzLineSource(std::string name, gzFile file)
      : LineSource(std::move(name)), file_(file) {}

  ~GzLineSource() override { gzclose(file_); }

  bool next(std::string& line) override {
    line.clear();
    for (;;) {
      const auto begin = buffer_.begin() + static_cast<std::ptrdiff_t>(pos_);
      const auto newline = std::find(begin, buffer_.end(), '\n');
      if (newline != buffer_.end()) {
        line.append(begin, newline);
        pos_ = static_cast<std::size_t>(newline - buffer_.begin()) + 1;
        return true;
      }
      line.append(begin, buffer_.end());
      buffer_.clear();
      pos_ = 0;
      if (eof_) return !line.empty();
      fill();
    }
  }

 private:
  void fill() {
    buffer_.resize(1 << 16);
    const int n = gzread(file_, buffer_.data(),
                         static_cast<unsigned>(buffer_.size()));
    if (n < 0) {
      int err = Z_OK;
      const char* msg = gzerror(file_, &err);
      throw Error(ErrorCode::IoError, name() + ": " + msg);
    }
    buffer_.resize(static_cast<std::size_t>(n));
    if (n == 0) eof_ = true;
  }

  gzFile file_;
  std::string buffer_;
  std::size_t pos_ = 0;
  bool eof_ = false;
};

}  // namespace

RawDocument wrap_raw(std::string_view line, std::string origin, Timestamp now) {
  return RawDocument{std::string(line), "cowrie", std::move(origin), now};
}

ParseResult parse_event(std::string_view line, std::size_t line_no) {
  json doc = json::parse(line.begin(), line.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    return make_error(ErrorCode::MalformedJson, line_no, "not a JSON object");
  }

  CowrieEvent event;
  for (const char* key : {"eventid", "timestamp", "session"}) {
    if (find_string(doc, key) == nullptr) {
      return make_error(ErrorCode::MissingField, line_no,
                        std::string("missing string field '") + key + "'");
    }
  }
  event.event_id = doc["eventid"].get<std::string>();
  event.session_id = doc["session"].get<std::string>();
  if (event.session_id.empty()) {
    return make_error(ErrorCode::MissingField, line_no, "empty 'session'");
  }
  const auto& ts_text = doc["timestamp"].get_ref<const std::string&>();
  const auto ts = parse_timestamp(ts_text);
  if (!ts) {
    return make_error(ErrorCode::BadTimestamp, line_no,
                      "unparseable timestamp '" + ts_text + "'");
  }
  event.timestamp = *ts;
  event.message = text_field(doc, {"message", "msg"});
  event.source_ip = text_field(doc, {"src_ip"});
  event.sensor = text_field(doc, {"sensor"});

  if (event.is_command()) {
    const json* cmd = find_string(doc, "command");
    if (cmd == nullptr) cmd = find_string(doc, "input");
    if (cmd == nullptr) {
      return make_error(ErrorCode::MissingField, line_no,
                        "command event without 'command'/'input'");
    }
    event.command = strip_trailing_newline(cmd->get<std::string>());
  }
  return event;
}

std::string serialize_event(const CowrieEvent& event) {
  json doc = {
      {"eventid", event.event_id},
      {"timestamp", format_timestamp(event.timestamp)},
      {"session", event.session_id},
      {"src_ip", event.source_ip},
      {"sensor", event.sensor},
      {"message", event.message},
  };
  if (event.command) doc["command"] = *event.command;
  return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::vector<CowrieEvent> filter_command_events(std::vector<CowrieEvent> events) {
  std::erase_if(events, [](const CowrieEvent& e) { return !e.is_command(); });
  return events;
}

std::unique_ptr<LineSource> LineSource::open(const std::string& path) {
  gzFile file = nullptr;
  std::string name = path;
  if (path == "-") {
    const int fd = ::dup(STDIN_FILENO);
    if (fd >= 0) file = gzdopen(fd, "rb");
    name = "<stdin>";
  } else {
    file = gzopen(path.c_str(), "rb");
  }
  if (file == nullptr) {
    throw Error(ErrorCode::IoError, "cannot open " + name);
  }
  gzbuffer(file, 1 << 16);
  return std::make_unique<GzLineSource>(std::move(name), file);
}

std::string Diagnostic::to_string() const {
  return origin + ":" + std::to_string(line) + ": " + reason;
}

std::vector<CowrieEvent> read_events(LineSource& source,
                                     std::uint64_t& next_sequence,
                                     IngestStats& stats,
                                     const DiagnosticSink& on_error) {
  std::vector<CowrieEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (source.next(line)) {
    ++line_no;
    ++stats.lines;
    const RawDocument doc = wrap_raw(line, source.name(), now_utc());
    ParseResult result = parse_event(doc.payload, line_no);
    if (auto* err = std::get_if<ParseError>(&result)) {
      ++stats.errors;
      if (on_error) {
        on_error(Diagnostic{source.name(), line_no, err->code, err->reason});
      }
      continue;
    }
    auto& event = std::get<CowrieEvent>(result);
    event.sequence = next_sequence++;
    ++stats.events;
    if (event.is_command()) ++stats.command_events;
    events.push_back(std::move(event));
  }
  return events;
}

}  // namespace chainwatch
