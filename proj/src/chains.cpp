#include "chainwatch/chains.hpp"

#include <algorithm>

namespace chainwatch {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

std::string normalize_command(std::string_view command) {
  while (!command.empty() && is_space(command.front())) command.remove_prefix(1);
  while (!command.empty() && is_space(command.back())) command.remove_suffix(1);
  return std::string(command);
}

Vocabulary::Vocabulary(std::vector<std::string> commands) {
  for (auto& c : commands) {
    const auto token = static_cast<Token>(commands_.size());
    if (!index_.emplace(c, token).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate vocabulary entry '" + c + "'");
    }
    commands_.push_back(std::move(c));
  }
}

Token Vocabulary::encode(std::string_view command) {
  std::string key = normalize_command(command);
  if (const auto it = index_.find(key); it != index_.end()) return it->second;
  const auto token = static_cast<Token>(commands_.size());
  index_.emplace(key, token);
  commands_.push_back(std::move(key));
  return token;
}

std::optional<Token> Vocabulary::find(std::string_view command) const {
  const auto it = index_.find(normalize_command(command));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::command(Token token) const {
  if (token >= commands_.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "token " + std::to_string(token) + " outside vocabulary");
  }
  return commands_[token];
}

CommandChain build_chain(const SessionRecord& session, Vocabulary& vocab) {
  CommandChain chain;
  chain.sensor = session.sensor;
  chain.session_id = session.session_id;
  chain.tokens.reserve(session.events.size());
  chain.timestamps.reserve(session.events.size());
  for (const auto& event : session.events) {
    chain.tokens.push_back(vocab.encode(event.command));
    chain.timestamps.push_back(event.timestamp);
  }
  return chain;
}

std::vector<CommandChain> build_chains(const Corpus& corpus, Vocabulary& vocab) {
  std::vector<CommandChain> chains;
  chains.reserve(corpus.sessions.size());
  for (const auto& session : corpus.sessions) {
    chains.push_back(build_chain(session, vocab));
  }
  return chains;
}

std::vector<SubChain> split_subchains(const TokenSeq& chain, int k) {
  if (k < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "window length must be >= 2, got " + std::to_string(k));
  }
  const auto len = static_cast<std::ptrdiff_t>(chain.size());
  std::vector<SubChain> windows;
  if (len < k) return windows;
  windows.reserve(static_cast<std::size_t>(len - k + 1));
  for (std::ptrdiff_t start = 0; start + k <= len; ++start) {
    const auto first = chain.begin() + start;
    windows.push_back(SubChain{k, TokenSeq(first, first + k - 1), first[k - 1]});
  }
  return windows;
}

}  // namespace chainwatch
