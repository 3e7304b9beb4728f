#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chainwatch/session_store.hpp"

namespace chainwatch {

using Token = std::uint32_t;
using TokenSeq = std::vector<Token>;

/// Strips surrounding whitespace (including a trailing newline).
std::string normalize_command(std::string_view command);

/// Dense command <-> token map; tokens are handed out in first-seen order.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> commands);

  /// Token for `command` (normalized), appending it if unseen.
  Token encode(std::string_view command);

  /// Token if known, without growing.
  std::optional<Token> find(std::string_view command) const;

  const std::string& command(Token token) const;
  std::size_t size() const { return commands_.size(); }
  const std::vector<std::string>& commands() const { return commands_; }

  bool operator==(const Vocabulary& other) const {
    return commands_ == other.commands_;
  }

 private:
  std::vector<std::string> commands_;
  std::unordered_map<std::string, Token> index_;
};

struct CommandChain {
  std::string sensor;
  std::string session_id;
  TokenSeq tokens;
  std::vector<Timestamp> timestamps;

  bool operator==(const CommandChain&) const = default;
};

struct SubChain {
  int k = 0;
  TokenSeq prefix;
  Token label = 0;

  bool operator==(const SubChain&) const = default;
};

CommandChain build_chain(const SessionRecord& session, Vocabulary& vocab);

std::vector<CommandChain> build_chains(const Corpus& corpus, Vocabulary& vocab);

/// All consecutive windows of length k, left to right. Requires k >= 2.
std::vector<SubChain> split_subchains(const TokenSeq& chain, int k);

inline std::vector<SubChain> split_subchains(const CommandChain& chain, int k) {
  return split_subchains(chain.tokens, k);
}

}  // namespace chainwatch
