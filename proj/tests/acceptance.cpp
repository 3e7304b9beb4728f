// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "chainwatch/chainwatch.h"
#include "chainwatch/eval.hpp"
#include "chainwatch/ingest.hpp"
#include "chainwatch/predictor.hpp"
#include "chainwatch/session_store.hpp"
#include "chainwatch/synth.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace chainwatch;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Minimum over every edit script, enumerated by recursion on the heads.
std::size_t oracle_distance(const Token* a, std::size_t na, const Token* b, std::size_t nb) {
  if (na == 0) return nb;
  if (nb == 0) return na;
  const std::size_t keep = oracle_distance(a + 1, na - 1, b + 1, nb - 1) + (a[0] == b[0] ? 0 : 1);
  const std::size_t del = oracle_distance(a + 1, na - 1, b, nb) + 1;
  const std::size_t ins = oracle_distance(a, na, b + 1, nb - 1) + 1;
  return std::min({keep, del, ins});
}

std::vector<SubChain> windows_of(const std::vector<CommandChain>& chains, int k_min, int k_max) {
  std::vector<SubChain> out;
  for (int k = k_min; k <= k_max; ++k)
    for (const auto& c : chains) {
      auto w = split_subchains(c, k);
      out.insert(out.end(), w.begin(), w.end());
    }
  return out;
}

Outcome ac1() {
  std::vector<TokenSeq> all{{}};
  for (std::size_t len = 1; len <= 4; ++len) {
    std::vector<TokenSeq> next;
    for (const auto& s : all)
      if (s.size() == len - 1)
        for (Token t = 0; t < 3; ++t) {
          auto e = s;
          e.push_back(t);
          next.push_back(e);
        }
    all.insert(all.end(), next.begin(), next.end());
  }
  const auto start = Clock::now();
  std::size_t pairs = 0, mismatches = 0;
  for (const auto& a : all)
    for (const auto& b : all) {
      ++pairs;
      if (levenshtein(a, b) != oracle_distance(a.data(), a.size(), b.data(), b.size())) ++mismatches;
    }
  const double t = seconds_since(start);
  return {pairs == 14641 && mismatches == 0 && t < 5.0,
          fmt("%zu pairs, %zu mismatches, %.3f s", pairs, mismatches, t)};
}

Outcome ac2() {
  std::mt19937_64 rng(2);
  const auto random_seq = [&] {
    TokenSeq s(rng() % 13);
    for (auto& t : s) t = static_cast<Token>(rng() % 30);
    return s;
  };
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_seq(), b = random_seq(), c = random_seq();
    const auto ab = levenshtein(a, b), ba = levenshtein(b, a);
    const auto bc = levenshtein(b, c), ac = levenshtein(a, c);
    if (ab != ba || ac > ab + bc) ++violations;
    if ((ab == 0) != (a == b)) ++violations;
    for (const auto& [x, y] : {std::pair{&a, &b}, std::pair{&b, &c}, std::pair{&a, &c}}) {
      const auto n = normalized_levenshtein(*x, *y);
      if (n.edits > n.total_length || n.value() < 0.0 || n.value() > 1.0) ++violations;
    }
  }
  return {violations == 0, fmt("10000 triples, %zu violations", violations)};
}

Outcome ac3() {
  std::mt19937_64 rng(3);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    TokenSeq chain(rng() % 30);
    for (auto& t : chain) t = static_cast<Token>(rng() % 28);
    for (int k = 2; k <= 12; ++k) {
      const long expected = std::max(0L, static_cast<long>(chain.size()) - k + 1);
      if (static_cast<long>(split_subchains(chain, k).size()) != expected) ++bad;
    }
  }
  const TokenSeq worked{1, 2, 3, 4, 5, 6};
  const auto four = split_subchains(worked, 4);
  const bool worked_ok = four.size() == 3 && split_subchains(worked, 5).size() == 2 &&
                         four[0].prefix == TokenSeq{1, 2, 3} && four[0].label == 4 &&
                         four[2].prefix == TokenSeq{3, 4, 5} && four[2].label == 6;
  return {bad == 0 && worked_ok,
          fmt("11000 chain/k cases, %zu wrong; worked case L=6 k=4 -> %zu, k=5 -> %zu", bad,
              four.size(), split_subchains(worked, 5).size())};
}

Outcome ac4() {
  const Corpus corpus = generate(default_mirai_like_spec(0));
  Vocabulary vocab;
  const auto windows = windows_of(build_chains(corpus, vocab), 2, 20);
  const auto model = FrequencyModel::train(windows, vocab);
  std::size_t checked = 0, bad = 0;
  for (int k = 2; k <= 20; ++k) {
    // Recount from the raw command strings.
    std::map<std::vector<std::string>, std::uint64_t> recount;
    for (const auto& s : corpus.sessions)
      for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= s.events.size(); ++i) {
        std::vector<std::string> w;
        for (std::size_t j = i; j < i + static_cast<std::size_t>(k); ++j) w.push_back(s.events[j].command);
        ++recount[w];
      }
    std::uint64_t expected = 0;
    for (const auto& [w, n] : recount) expected += n;
    std::uint64_t stored = 0;
    if (model.has_length(k)) {
      for (const auto& e : model.table(k).entries())
        for (const auto& l : e.labels) {
          stored += l.count;
          std::vector<std::string> w;
          for (const Token t : e.prefix) w.push_back(vocab.command(t));
          w.push_back(vocab.command(l.label));
          const auto it = recount.find(w);
          if (it == recount.end() || it->second != l.count) ++bad;
        }
    }
    if (stored != expected) ++bad;
    ++checked;
  }
  return {bad == 0, fmt("%zu sessions, k=2..20 (%zu lengths), %zu mismatches",
                        corpus.sessions.size(), checked, bad)};
}

Outcome ac5() {
  auto spec = default_mirai_like_spec(0);
  spec.noise = 0.0;
  const auto start = Clock::now();
  EvalOptions opt;
  opt.seed = 0;
  opt.timing_repeats = 1;
  const auto report = run_evaluation(generate(spec), opt);
  const double t = seconds_since(start);
  bool all = report.per_k.size() == 9;
  std::string accs;
  for (const auto& r : report.per_k) {
    all = all && r.accuracy && *r.accuracy == 1.0;
    accs += fmt(" k%d=%.2f", r.k, r.accuracy ? *r.accuracy * 100 : -1.0);
  }
  return {all && t < 30.0, fmt("%.2f s;", t) + accs};
}

Outcome ac6() {
  std::map<int, double> sum;
  for (std::uint64_t seed : {0, 1, 2}) {
    auto spec = default_mirai_like_spec(seed);
    spec.n_sessions = 2000;
    EvalOptions opt;
    opt.seed = seed;
    opt.timing_repeats = 1;
    for (const auto& r : run_evaluation(generate(spec), opt).per_k)
      sum[r.k] += r.accuracy ? *r.accuracy * 100.0 / 3.0 : 0.0;
  }
  bool ok = sum.size() == 9;
  std::string accs;
  for (const auto& [k, acc] : sum) {
    ok = ok && acc >= 90.0;
    accs += fmt(" k%d=%.2f", k, acc);
  }
  ok = ok && sum[11] >= sum[3] - 2.0;
  return {ok, "mean over seeds 0-2:" + accs};
}

Outcome ac7() {
  auto spec = default_mirai_like_spec(0);
  spec.n_sessions = 4000;
  const auto start = Clock::now();
  const auto rows = scaling_experiment(generate(spec), {5000, 10000, 20000}, 3, 0, 3);
  const double total = seconds_since(start);
  bool ok = total < 120.0;
  std::string detail;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double train = rows[i].train_time_s / rows[i - 1].train_time_s;
    const double test = rows[i].test_time_s / rows[i - 1].test_time_s;
    ok = ok && train <= 2.5 && test <= 2.5;
    detail += fmt(" %zu->%zu train x%.2f test x%.2f;", rows[i - 1].size, rows[i].size, train, test);
  }
  return {ok, fmt("k=3, best of 3, %.2f s total;", total) + detail};
}

Outcome ac8() {
  const Corpus corpus = generate(default_mirai_like_spec(8));
  Vocabulary vocab;
  const auto windows = windows_of(build_chains(corpus, vocab), 3, 11);
  const auto model = FrequencyModel::train(windows, vocab);
  std::mt19937_64 rng(8);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const int k = 3 + static_cast<int>(rng() % 9);
    const auto& entries = model.table(k).entries();
    const auto& prefix = entries[rng() % entries.size()].prefix;
    const auto fast = predict_next(model, k, prefix, ScanMode::Auto);
    const auto full = predict_next(model, k, prefix, ScanMode::FullScan);
    if (!(fast == full) || !fast.exact || fast.matched_prefix != prefix) ++bad;
  }
  return {bad == 0, fmt("1000 stored-prefix queries, %zu disagreements", bad)};
}

Corpus random_corpus(std::mt19937_64& rng) {
  static const std::vector<std::string> pool = {
      "enable", "shell", "sh", "cat /proc/mounts", "echo \"quoted\" \\ back",
      "tab\there", "unicode \xc3\xa9\xe2\x9c\x93", "", "cd /tmp || cd /var/run", "{\"json\":1}"};
  Corpus c;
  c.source = "random";
  c.created_at = Timestamp{static_cast<std::int64_t>(rng() % 2000000000000000ULL)};
  const std::size_t n = rng() % 12;
  for (std::size_t s = 0; s < n; ++s) {
    SessionRecord rec{"sess" + std::to_string(s), rng() % 2 ? "hp-a" : "hp-b",
                      "10.0.0." + std::to_string(rng() % 255), {}};
    std::int64_t t = static_cast<std::int64_t>(rng() % 1000000000000000ULL);
    const std::size_t len = 1 + rng() % 15;
    for (std::size_t i = 0; i < len; ++i) {
      t += static_cast<std::int64_t>(rng() % 3);
      rec.events.push_back({Timestamp{t}, pool[rng() % pool.size()]});
    }
    c.sessions.push_back(rec);
  }
  std::sort(c.sessions.begin(), c.sessions.end(), [](const auto& a, const auto& b) {
    return std::tie(a.sensor, a.session_id) < std::tie(b.sensor, b.session_id);
  });
  return c;
}

// Independent count over the raw lines: a record is a command event if it is
// a JSON object with the command eventid, a non-empty string session and a
// syntactically valid RFC 3339 timestamp.
std::pair<std::size_t, std::size_t> brute_force_fixture_counts(const std::string& path) {
  static const std::regex rfc3339(
      R"(^\d{4}-\d{2}-\d{2}[Tt ]\d{2}:\d{2}:\d{2}(\.\d+)?([Zz]|[+-]\d{2}:\d{2})$)");
  std::ifstream in(path);
  std::string line;
  std::size_t events = 0;
  std::set<std::pair<std::string, std::string>> sessions;
  while (std::getline(in, line)) {
    const auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) continue;
    const auto id = doc.find("eventid"), ts = doc.find("timestamp"), sess = doc.find("session");
    if (id == doc.end() || ts == doc.end() || sess == doc.end()) continue;
    if (!id->is_string() || !ts->is_string() || !sess->is_string()) continue;
    if (sess->get<std::string>().empty() || !std::regex_match(ts->get<std::string>(), rfc3339)) continue;
    if (*id != "cowrie.command.input") continue;
    ++events;
    sessions.insert({doc.value("sensor", ""), *sess});
  }
  return {events, sessions.size()};
}

Outcome ac9() {
  std::mt19937_64 rng(9);
  std::size_t corpus_bad = 0, model_bad = 0, models = 0;
  chainwatch::testing::TempFile file;
  for (int i = 0; i < 100; ++i) {
    const Corpus c = random_corpus(rng);
    save_corpus(c, file.path());
    const Corpus back = load_corpus(file.path());
    if (back.sessions != c.sessions || back.created_at != c.created_at || back.source != c.source)
      ++corpus_bad;

    Vocabulary vocab;
    const auto windows = windows_of(build_chains(c, vocab), 2, 6);
    if (windows.empty()) continue;
    ++models;
    const auto model = FrequencyModel::train(windows, vocab);
    save_model(model, file.path());
    if (!(load_model(file.path()) == model)) ++model_bad;
  }

  const std::string fixture = chainwatch::testing::data_path("cowrie_100.json");
  const auto [want_events, want_sessions] = brute_force_fixture_counts(fixture);
  auto src = LineSource::open(fixture);
  std::uint64_t seq = 0;
  IngestStats stats;
  const auto commands = filter_command_events(read_events(*src, seq, stats, {}));
  const Corpus ingested = group_sessions(commands, fixture, Timestamp{0});
  const bool fixture_ok = ingested.event_count() == want_events &&
                          ingested.sessions.size() == want_sessions && want_events == 76 &&
                          want_sessions == 5;
  return {corpus_bad == 0 && model_bad == 0 && fixture_ok,
          fmt("100 corpora (%zu bad), %zu models (%zu bad); fixture %zu events/%zu sessions vs "
              "brute force %zu/%zu",
              corpus_bad, models, model_bad, ingested.event_count(), ingested.sessions.size(),
              want_events, want_sessions)};
}

Outcome ac10() {
  char* spec_text = nullptr;
  if (cw_spec_default_json(10, &spec_text) != CW_OK) return {false, cw_last_error()};
  cw_corpus* corpus = nullptr;
  const cw_status st = cw_generate(spec_text, 0, 0, &corpus);
  cw_string_free(spec_text);
  if (st != CW_OK) return {false, cw_last_error()};

  const auto run = [&](unsigned jobs) {
    cw_eval_options opt;
    cw_eval_options_init(&opt);
    opt.seed = 10;
    opt.jobs = jobs;
    opt.timing_repeats = 1;
    cw_report* report = nullptr;
    std::string out;
    if (cw_evaluate(corpus, &opt, &report) != CW_OK) return out;
    char *j = nullptr, *c = nullptr;
    cw_report_json(report, 0, &j);
    cw_report_csv(report, 0, &c);
    out = std::string(j) + "\n" + c;
    cw_string_free(j);
    cw_string_free(c);
    cw_report_free(report);
    return out;
  };
  const std::string one = run(1), eight = run(8);
  cw_corpus_free(corpus);
  return {!one.empty() && one == eight,
          fmt("jobs=1 vs jobs=8: %zu-byte reports, %s", one.size(),
              one == eight ? "identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 levenshtein oracle equivalence", ac1},
      {"AC2 metric properties", ac2},
      {"AC3 window-count law", ac3},
      {"AC4 train conservation", ac4},
      {"AC5 noise-free learnability", ac5},
      {"AC6 noisy-regime shape", ac6},
      {"AC7 linearity", ac7},
      {"AC8 exact-hit fast path", ac8},
      {"AC9 round-trips", ac9},
      {"AC10 determinism across jobs", ac10},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
