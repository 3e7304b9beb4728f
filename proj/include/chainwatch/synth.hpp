#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chainwatch/chains.hpp"
#include "chainwatch/session_store.hpp"

namespace chainwatch {

struct TokenProbability {
  Token token = 0;
  double probability = 0.0;

  bool operator==(const TokenProbability&) const = default;
};

struct ContextTransition {
  TokenSeq context;  // exactly `order` tokens
  std::vector<TokenProbability> next;

  bool operator==(const ContextTransition&) const = default;
};

struct InitialContext {
  TokenSeq context;
  double probability = 0.0;

  bool operator==(const InitialContext&) const = default;
};

/// Order-n Markov process over command tokens with observation noise.
///
/// A session starts from a context drawn from `initial` and walks the
/// transition table. Each emitted command is independently replaced by a
/// uniformly random token with probability `noise`; the walk itself always
/// continues from the uncorrupted token, so noise never derails the script.
struct GeneratorSpec {
  std::uint32_t vocab_size = 28;
  int order = 2;
  std::vector<InitialContext> initial;
  std::vector<ContextTransition> transition;
  double noise = 0.05;
  int min_session_length = 6;
  int max_session_length = 20;
  std::uint32_t n_sessions = 1000;
  std::uint64_t seed = 0;

  bool operator==(const GeneratorSpec&) const = default;
};

/// Throws InvalidSpec describing the first violated constraint.
void validate_spec(const GeneratorSpec& spec);

std::string spec_to_json(const GeneratorSpec& spec);
GeneratorSpec spec_from_json(const std::string& text);

/// Mirai-like script: a fixed 23-step loop over commands 0..19 entered at one
/// of four points, with three order-2 branch commands and noise 0.05.
/// Commands 20..27 never occur in the script itself.
GeneratorSpec default_mirai_like_spec(std::uint64_t seed);

std::string synthetic_command(Token token);  // "cmd_<token>"

/// Pure function of `spec`. Sessions are "synth-<index>" on sensor "synth".
Corpus generate(const GeneratorSpec& spec);

}  // namespace chainwatch
