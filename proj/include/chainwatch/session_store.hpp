#pragma once

#include <string>
#include <vector>

#include "chainwatch/ingest.hpp"
#include "chainwatch/timestamp.hpp"

namespace chainwatch {

struct SessionEvent {
  Timestamp timestamp;
  std::string command;

  bool operator==(const SessionEvent&) const = default;
};

/// All command events of one login, in timestamp order. Identity is the
/// (sensor, session_id) pair since Cowrie ids are only unique per host.
struct SessionRecord {
  std::string session_id;
  std::string sensor;
  std::string source_ip;
  std::vector<SessionEvent> events;

  bool operator==(const SessionRecord&) const = default;
};

struct Corpus {
  std::vector<SessionRecord> sessions;
  Timestamp created_at;
  std::string source;

  std::size_t event_count() const;

  bool operator==(const Corpus&) const = default;
};

inline constexpr int kCorpusFormatVersion = 1;

/// Groups command events by (sensor, session_id). Events inside a session
/// are ordered by (timestamp, sequence); sessions by (sensor, session_id).
/// Non-command events are rejected with InvalidArgument.
Corpus group_sessions(const std::vector<CowrieEvent>& events,
                      std::string source = {}, Timestamp created_at = {});

void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

}  // namespace chainwatch
