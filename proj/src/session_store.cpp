#include "chainwatch/session_store.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "json.hpp"

namespace chainwatch {
namespace {

using nlohmann::json;

constexpr std::string_view kCorpusFormat = "chainwatch-corpus";

struct PendingEvent {
  Timestamp timestamp;
  std::uint64_t sequence;
  const CowrieEvent* event;
};

[[noreturn]] void corrupt(const std::string& path, std::size_t line,
                          const std::string& why) {
  throw Error(ErrorCode::IoError,
              path + ":" + std::to_string(line) + ": corrupt corpus: " + why);
}

std::string dump(const json& doc) {
  return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace

std::size_t Corpus::event_count() const {
  std::size_t n = 0;
  for (const auto& s : sessions) n += s.events.size();
  return n;
}

Corpus group_sessions(const std::vector<CowrieEvent>& events,
                      std::string source, Timestamp created_at) {
  std::map<std::pair<std::string, std::string>, std::vector<PendingEvent>> by_key;
  for (const auto& event : events) {
    if (!event.is_command() || !event.command) {
      throw Error(ErrorCode::InvalidArgument,
                  "group_sessions expects command events, got '" +
                      event.event_id + "'");
    }
    by_key[{event.sensor, event.session_id}].push_back(
        {event.timestamp, event.sequence, &event});
  }

  Corpus corpus;
  corpus.source = std::move(source);
  corpus.created_at = created_at;
  corpus.sessions.reserve(by_key.size());
  for (auto& [key, pending] : by_key) {
    std::sort(pending.begin(), pending.end(),
              [](const PendingEvent& a, const PendingEvent& b) {
                return std::tie(a.timestamp, a.sequence) <
                       std::tie(b.timestamp, b.sequence);
              });
    SessionRecord record;
    record.sensor = key.first;
    record.session_id = key.second;
    record.source_ip = pending.front().event->source_ip;
    record.events.reserve(pending.size());
    for (const auto& p : pending) {
      record.events.push_back({p.timestamp, *p.event->command});
    }
    corpus.sessions.push_back(std::move(record));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);

  out << dump(json{{"format", kCorpusFormat},
                   {"version", kCorpusFormatVersion},
                   {"created_at", format_timestamp(corpus.created_at)},
                   {"source", corpus.source},
                   {"sessions", corpus.sessions.size()}})
      << '\n';
  for (const auto& session : corpus.sessions) {
    json events = json::array();
    for (const auto& e : session.events) {
      events.push_back(
          {{"timestamp", format_timestamp(e.timestamp)}, {"command", e.command}});
    }
    out << dump(json{{"session", session.session_id},
                     {"sensor", session.sensor},
                     {"src_ip", session.source_ip},
                     {"events", std::move(events)}})
        << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::FormatVersionMismatch,
                path + ": missing corpus header");
  }
  const json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() ||
      header.value("format", "") != kCorpusFormat) {
    throw Error(ErrorCode::FormatVersionMismatch,
                path + ": not a chainwatch corpus");
  }
  if (!header.contains("version") || !header["version"].is_number_integer() ||
      header["version"].get<int>() != kCorpusFormatVersion) {
    throw Error(ErrorCode::FormatVersionMismatch,
                path + ": unsupported corpus version " +
                    (header.contains("version") ? header["version"].dump()
                                                : std::string("(none)")));
  }

  Corpus corpus;
  std::size_t expected = 0;
  try {
    const auto created = parse_timestamp(header.at("created_at").get<std::string>());
    if (!created) corrupt(path, 1, "bad created_at");
    corpus.created_at = *created;
    corpus.source = header.at("source").get<std::string>();
    expected = header.at("sessions").get<std::size_t>();
  } catch (const json::exception& e) {
    corrupt(path, 1, e.what());
  }

  std::set<std::pair<std::string, std::string>> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) corrupt(path, line_no, "bad JSON");
    SessionRecord record;
    try {
      record.session_id = doc.at("session").get<std::string>();
      record.sensor = doc.at("sensor").get<std::string>();
      record.source_ip = doc.at("src_ip").get<std::string>();
      for (const auto& e : doc.at("events")) {
        const auto ts = parse_timestamp(e.at("timestamp").get<std::string>());
        if (!ts) corrupt(path, line_no, "bad event timestamp");
        record.events.push_back({*ts, e.at("command").get<std::string>()});
      }
    } catch (const json::exception& e) {
      corrupt(path, line_no, e.what());
    }
    if (record.events.empty()) corrupt(path, line_no, "session without events");
    if (!std::is_sorted(record.events.begin(), record.events.end(),
                        [](const SessionEvent& a, const SessionEvent& b) {
                          return a.timestamp < b.timestamp;
                        })) {
      corrupt(path, line_no, "events out of order");
    }
    if (!seen.emplace(record.sensor, record.session_id).second) {
      corrupt(path, line_no, "duplicate session " + record.session_id);
    }
    corpus.sessions.push_back(std::move(record));
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path);
  if (corpus.sessions.size() != expected) {
    corrupt(path, line_no,
            "expected " + std::to_string(expected) + " sessions, found " +
                std::to_string(corpus.sessions.size()));
  }
  return corpus;
}

}  // namespace chainwatch
