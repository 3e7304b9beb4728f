#include "chainwatch/synth.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "json.hpp"
#include "random.hpp"

namespace chainwatch {
namespace {

using nlohmann::json;

// 2019-08-27T00:00:00Z
constexpr std::int64_t kSynthEpochMicros = 1566864000LL * 1'000'000;

[[noreturn]] void invalid(const std::string& why) {
  throw Error(ErrorCode::InvalidSpec, why);
}

void check_context(const GeneratorSpec& spec, const TokenSeq& context) {
  if (context.size() != static_cast<std::size_t>(spec.order)) {
    invalid("context length " + std::to_string(context.size()) +
            " != order " + std::to_string(spec.order));
  }
  for (const Token t : context) {
    if (t >= spec.vocab_size) invalid("token " + std::to_string(t) + " >= vocab_size");
  }
}

void check_sum(double sum, const std::string& what) {
  if (std::abs(sum - 1.0) > 1e-9) invalid(what + " probabilities sum to " + std::to_string(sum));
}

template <typename Items, typename Prob>
std::size_t sample(detail::Rng& rng, const Items& items, Prob prob) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double p = prob(items[i]);
    if (p <= 0.0) continue;
    last_positive = i;
    acc += p;
    if (u < acc) return i;
  }
  return last_positive;  // rounding slack
}

}  // namespace

void validate_spec(const GeneratorSpec& spec) {
  if (spec.vocab_size == 0) invalid("vocab_size must be positive");
  if (spec.order < 1) invalid("order must be >= 1");
  if (!(spec.noise >= 0.0 && spec.noise <= 1.0)) invalid("noise must lie in [0,1]");
  if (spec.min_session_length < 1 || spec.min_session_length > spec.max_session_length) {
    invalid("session_length must be a range 1 <= min <= max");
  }
  if (spec.initial.empty()) invalid("no initial contexts");

  double initial_sum = 0.0;
  for (const auto& init : spec.initial) {
    check_context(spec, init.context);
    if (init.probability < 0.0) invalid("negative initial probability");
    initial_sum += init.probability;
  }
  check_sum(initial_sum, "initial");

  std::map<TokenSeq, const ContextTransition*> table;
  for (const auto& tr : spec.transition) {
    check_context(spec, tr.context);
    if (!table.emplace(tr.context, &tr).second) invalid("duplicate transition context");
    double sum = 0.0;
    for (const auto& np : tr.next) {
      if (np.token >= spec.vocab_size) invalid("next token outside vocabulary");
      if (np.probability < 0.0) invalid("negative transition probability");
      sum += np.probability;
    }
    check_sum(sum, "transition");
  }

  // Every context the walk can reach needs a row.
  std::set<TokenSeq> seen;
  std::vector<TokenSeq> frontier;
  for (const auto& init : spec.initial) {
    if (init.probability > 0.0 && seen.insert(init.context).second) {
      frontier.push_back(init.context);
    }
  }
  while (!frontier.empty()) {
    const TokenSeq context = std::move(frontier.back());
    frontier.pop_back();
    const auto it = table.find(context);
    if (it == table.end()) {
      std::string text;
      for (const Token t : context) text += (text.empty() ? "" : ",") + std::to_string(t);
      invalid("reachable context (" + text + ") has no transition");
    }
    for (const auto& np : it->second->next) {
      if (np.probability <= 0.0) continue;
      TokenSeq next(context.begin() + 1, context.end());
      next.push_back(np.token);
      if (seen.insert(next).second) frontier.push_back(std::move(next));
    }
  }
}

std::string spec_to_json(const GeneratorSpec& spec) {
  json initial = json::array();
  for (const auto& i : spec.initial) {
    initial.push_back({{"context", i.context}, {"p", i.probability}});
  }
  json transition = json::array();
  for (const auto& tr : spec.transition) {
    json next = json::array();
    for (const auto& np : tr.next) next.push_back({{"token", np.token}, {"p", np.probability}});
    transition.push_back({{"context", tr.context}, {"next", std::move(next)}});
  }
  const json doc = {{"vocab_size", spec.vocab_size},
                    {"order", spec.order},
                    {"noise", spec.noise},
                    {"session_length", {spec.min_session_length, spec.max_session_length}},
                    {"n_sessions", spec.n_sessions},
                    {"seed", spec.seed},
                    {"initial", std::move(initial)},
                    {"transition", std::move(transition)}};
  return doc.dump(2);
}

GeneratorSpec spec_from_json(const std::string& text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) invalid("spec is not a JSON object");
  GeneratorSpec spec;
  try {
    spec.vocab_size = doc.value("vocab_size", spec.vocab_size);
    spec.order = doc.value("order", spec.order);
    spec.noise = doc.value("noise", spec.noise);
    if (const auto it = doc.find("session_length"); it != doc.end()) {
      if (!it->is_array() || it->size() != 2) invalid("session_length must be [min, max]");
      spec.min_session_length = (*it)[0].get<int>();
      spec.max_session_length = (*it)[1].get<int>();
    }
    spec.n_sessions = doc.value("n_sessions", spec.n_sessions);
    spec.seed = doc.value("seed", spec.seed);
    for (const auto& i : doc.at("initial")) {
      spec.initial.push_back({i.at("context").get<TokenSeq>(), i.at("p").get<double>()});
    }
    for (const auto& tr : doc.at("transition")) {
      ContextTransition row{tr.at("context").get<TokenSeq>(), {}};
      for (const auto& np : tr.at("next")) {
        row.next.push_back({np.at("token").get<Token>(), np.at("p").get<double>()});
      }
      spec.transition.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    invalid(std::string("bad spec JSON: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

GeneratorSpec default_mirai_like_spec(std::uint64_t seed) {
  // One scripted loop over commands 0..19. Commands 17, 18 and 19 each occur
  // twice, so what follows them depends on the command before: those are
  // the three branch points. Commands 20..27 only appear through noise.
  static constexpr Token kScript[] = {0, 1,  17, 2,  3,  18, 4,  5,  19, 6,  7, 17,
                                      8, 9,  18, 10, 11, 19, 12, 13, 14, 15, 16};
  constexpr std::size_t n = std::size(kScript);

  GeneratorSpec spec;
  spec.vocab_size = 28;
  spec.order = 2;
  spec.noise = 0.05;
  spec.min_session_length = 6;
  spec.max_session_length = 20;
  spec.n_sessions = 1000;
  spec.seed = seed;
  spec.initial = {{{0, 1}, 0.4}, {{4, 5}, 0.2}, {{9, 18}, 0.2}, {{13, 14}, 0.2}};
  for (std::size_t i = 0; i < n; ++i) {
    spec.transition.push_back(
        {{kScript[i], kScript[(i + 1) % n]}, {{kScript[(i + 2) % n], 1.0}}});
  }
  return spec;
}

std::string synthetic_command(Token token) { return "cmd_" + std::to_string(token); }

Corpus generate(const GeneratorSpec& spec) {
  validate_spec(spec);
  std::map<TokenSeq, const ContextTransition*> table;
  for (const auto& tr : spec.transition) table.emplace(tr.context, &tr);

  detail::Rng rng(spec.seed);
  const auto emit = [&](Token clean) -> Token {
    const bool corrupt = rng.uniform() < spec.noise;
    return corrupt ? static_cast<Token>(rng.below(spec.vocab_size)) : clean;
  };

  Corpus corpus;
  corpus.created_at = Timestamp{kSynthEpochMicros};
  corpus.source = "synth seed=" + std::to_string(spec.seed);
  corpus.sessions.reserve(spec.n_sessions);
  const auto span = static_cast<std::uint64_t>(spec.max_session_length - spec.min_session_length + 1);

  for (std::uint32_t s = 0; s < spec.n_sessions; ++s) {
    const auto length = static_cast<std::size_t>(spec.min_session_length) +
                        static_cast<std::size_t>(rng.below(span));
    const auto& init = spec.initial[sample(rng, spec.initial,
                                           [](const InitialContext& i) { return i.probability; })];
    TokenSeq context = init.context;
    TokenSeq emitted;
    emitted.reserve(length);
    for (const Token t : context) {
      if (emitted.size() == length) break;
      emitted.push_back(emit(t));
    }
    while (emitted.size() < length) {
      const auto& next = table.at(context)->next;
      const Token clean =
          next[sample(rng, next, [](const TokenProbability& p) { return p.probability; })].token;
      emitted.push_back(emit(clean));
      context.erase(context.begin());
      context.push_back(clean);
    }

    char id[32];
    std::snprintf(id, sizeof id, "synth-%06u", s);
    char ip[32];
    std::snprintf(ip, sizeof ip, "10.%u.%u.%u", (s >> 16) & 0xff, (s >> 8) & 0xff, s & 0xff);
    SessionRecord record{id, "synth", ip, {}};
    std::int64_t t = kSynthEpochMicros + static_cast<std::int64_t>(s) * 3'600'000'000LL;
    for (const Token token : emitted) {
      t += 1'000'000 + static_cast<std::int64_t>(rng.below(1'000'000));
      record.events.push_back({Timestamp{t}, synthetic_command(token)});
    }
    corpus.sessions.push_back(std::move(record));
  }
  return corpus;
}

}  // namespace chainwatch
