#include "chainwatch/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "json.hpp"
#include "random.hpp"

namespace chainwatch {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

/// Keeps at most `limit` items, chosen by a seeded shuffle, in original order.
template <typename T>
std::vector<T> subsample(std::vector<T> items, std::size_t limit, std::uint64_t seed) {
  if (items.size() <= limit) return items;
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  detail::Rng rng(seed);
  rng.shuffle(idx.begin(), idx.end());
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  std::vector<T> kept;
  kept.reserve(limit);
  for (const auto i : idx) kept.push_back(std::move(items[i]));
  return kept;
}

std::vector<SubChain> windows_of(const std::vector<CommandChain>& chains, int k) {
  std::vector<SubChain> out;
  for (const auto& chain : chains) {
    auto w = split_subchains(chain, k);
    out.insert(out.end(), std::make_move_iterator(w.begin()),
               std::make_move_iterator(w.end()));
  }
  return out;
}

std::vector<Token> predict_serial(const FrequencyModel& model, int k,
                                  const std::vector<SubChain>& windows,
                                  std::vector<char>* exact) {
  std::vector<Token> predicted(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Prediction p = predict_next(model, k, windows[i].prefix);
    predicted[i] = p.predicted;
    if (exact) (*exact)[i] = p.exact;
  }
  return predicted;
}

std::vector<Token> predict_parallel(const FrequencyModel& model, int k,
                                    const std::vector<SubChain>& windows,
                                    unsigned jobs, std::vector<char>& exact) {
  std::vector<Token> predicted(windows.size());
  const std::size_t n = windows.size();
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
  std::vector<std::exception_ptr> failures(jobs);
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = n * w / jobs; i < n * (w + 1) / jobs; ++i) {
          const Prediction p = predict_next(model, k, windows[i].prefix);
          predicted[i] = p.predicted;
          exact[i] = p.exact;
        }
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return predicted;
}

Corpus subset(const Corpus& corpus, const std::vector<std::size_t>& indices) {
  Corpus out;
  out.created_at = corpus.created_at;
  out.source = corpus.source;
  out.sessions.reserve(indices.size());
  for (const auto i : indices) out.sessions.push_back(corpus.sessions[i]);
  return out;
}

void check_k_range(int k_min, int k_max) {
  if (k_min < 2 || k_min > k_max) {
    throw Error(ErrorCode::InvalidArgument, "window range must satisfy 2 <= k_min <= k_max");
  }
}

std::string_view unit_name(SampleUnit unit) {
  return unit == SampleUnit::Windows ? "windows" : "sessions";
}

}  // namespace

std::string corpus_fingerprint(const Corpus& corpus) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  const auto feed = [&h](std::string_view bytes) {
    for (const unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;  // field separator
    h *= 0x100000001b3ULL;
  };
  for (const auto& s : corpus.sessions) {
    feed(s.sensor);
    feed(s.session_id);
    feed(s.source_ip);
    for (const auto& e : s.events) {
      feed(std::to_string(e.timestamp.micros));
      feed(e.command);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::pair<Corpus, Corpus> split_dataset(const Corpus& corpus, double ratio,
                                        std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "split ratio must lie in (0, 1)");
  }
  const std::size_t n = corpus.sessions.size();
  if (n < 2) {
    throw Error(ErrorCode::TooFewSessions,
                "need at least 2 sessions to split, have " + std::to_string(n));
  }
  const auto rounded = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  const std::size_t n_train = std::clamp<std::size_t>(rounded, 1, n - 1);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  detail::Rng rng(seed);
  rng.shuffle(idx.begin(), idx.end());
  std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {subset(corpus, train_idx), subset(corpus, test_idx)};
}

EvalReport evaluate(const Corpus& train, const Corpus& test, const EvalOptions& options) {
  check_k_range(options.k_min, options.k_max);
  if (train.sessions.empty() || test.sessions.empty()) {
    throw Error(ErrorCode::InvalidArgument, "train and test corpora must be non-empty");
  }
  const unsigned jobs = std::max(1u, options.jobs);
  const int repeats = std::max(1, options.timing_repeats);

  Vocabulary vocab;
  const auto train_chains = build_chains(train, vocab);
  Vocabulary test_vocab = vocab;  // unseen test commands get fresh tokens
  const auto test_chains = build_chains(test, test_vocab);

  EvalReport report;
  report.split_seed = options.seed;
  report.split_ratio = options.split_ratio;
  report.n_train_sessions = train.sessions.size();
  report.n_test_sessions = test.sessions.size();
  report.sample_limit = options.sample_limit;
  report.sample_unit = options.sample_unit;

  bool any_model = false;
  for (int k = options.k_min; k <= options.k_max; ++k) {
    auto train_windows = windows_of(train_chains, k);
    auto test_windows = windows_of(test_chains, k);
    if (options.sample_limit && options.sample_unit == SampleUnit::Windows) {
      const auto salt = options.seed * 1000003ULL + static_cast<std::uint64_t>(k);
      train_windows = subsample(std::move(train_windows), *options.sample_limit, salt);
      test_windows = subsample(std::move(test_windows), *options.sample_limit, ~salt);
    }

    LengthResult row;
    row.k = k;
    row.n_train = train_windows.size();
    row.n_test = test_windows.size();
    if (train_windows.empty()) {
      row.has_model = false;
      report.per_k.push_back(std::move(row));
      continue;
    }
    any_model = true;

    FrequencyModel model;
    row.train_time_s = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repeats; ++r) {
      const auto start = Clock::now();
      model = FrequencyModel::train(train_windows, vocab);
      row.train_time_s = std::min(row.train_time_s, seconds_since(start));
    }

    std::vector<char> exact(test_windows.size(), 0);
    std::vector<Token> predicted;
    if (jobs > 1) predicted = predict_parallel(model, k, test_windows, jobs, exact);
    row.test_time_s = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repeats; ++r) {
      const auto start = Clock::now();
      auto run = predict_serial(model, k, test_windows, predicted.empty() ? &exact : nullptr);
      row.test_time_s = std::min(row.test_time_s, seconds_since(start));
      if (predicted.empty()) predicted = std::move(run);
    }

    for (std::size_t i = 0; i < test_windows.size(); ++i) {
      const bool ok = predicted[i] == test_windows[i].label;
      row.correct += ok ? 1 : 0;
      row.exact_hits += exact[i] ? 1 : 0;
      if (options.keep_log) {
        row.log.push_back({test_windows[i].prefix, test_windows[i].label, predicted[i],
                           exact[i] != 0});
      }
    }
    if (row.n_test > 0) {
      row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.n_test);
    }
    report.per_k.push_back(std::move(row));
  }
  if (!any_model) {
    throw Error(ErrorCode::EmptyTrainingSet,
                "no training windows for any length in [" + std::to_string(options.k_min) +
                    ", " + std::to_string(options.k_max) + "]");
  }
  return report;
}

EvalReport run_evaluation(const Corpus& corpus, const EvalOptions& options) {
  check_k_range(options.k_min, options.k_max);
  const Corpus* source = &corpus;
  Corpus limited;
  if (options.sample_limit && options.sample_unit == SampleUnit::Sessions &&
      *options.sample_limit < corpus.sessions.size()) {
    std::vector<std::size_t> idx(corpus.sessions.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    limited = subset(corpus, subsample(std::move(idx), *options.sample_limit,
                                       options.seed ^ 0x9e3779b97f4a7c15ULL));
    source = &limited;
  }
  const auto [train, test] = split_dataset(*source, options.split_ratio, options.seed);
  EvalReport report = evaluate(train, test, options);
  report.corpus_fingerprint = corpus_fingerprint(corpus);
  return report;
}

std::string EvalReport::to_json(bool with_timing) const {
  json rows = json::array();
  for (const auto& r : per_k) {
    json row = {{"k", r.k},
                {"accuracy", r.accuracy ? json(*r.accuracy) : json(nullptr)},
                {"accuracy_pct", r.accuracy ? json(*r.accuracy * 100.0) : json(nullptr)},
                {"correct", r.correct},
                {"exact_hits", r.exact_hits},
                {"n_train", r.n_train},
                {"n_test", r.n_test},
                {"has_model", r.has_model}};
    if (with_timing) {
      row["train_time_s"] = round_ms(r.train_time_s);
      row["test_time_s"] = round_ms(r.test_time_s);
    }
    rows.push_back(std::move(row));
  }
  const json doc = {{"format", "chainwatch-eval"},
                    {"version", 1},
                    {"split_seed", split_seed},
                    {"split_ratio", split_ratio},
                    {"corpus_fingerprint", corpus_fingerprint},
                    {"n_train_sessions", n_train_sessions},
                    {"n_test_sessions", n_test_sessions},
                    {"sample_limit", sample_limit ? json(*sample_limit) : json(nullptr)},
                    {"sample_unit", unit_name(sample_unit)},
                    {"per_k", std::move(rows)}};
  return doc.dump(2) + "\n";
}

std::string EvalReport::to_csv(bool with_timing) const {
  std::string out = with_timing ? "k,accuracy_pct,train_time_s,test_time_s,n_train,n_test,seed\n"
                                : "k,accuracy_pct,n_train,n_test,seed\n";
  char buf[160];
  for (const auto& r : per_k) {
    std::string acc;
    if (r.accuracy) {
      std::snprintf(buf, sizeof buf, "%.4f", *r.accuracy * 100.0);
      acc = buf;
    }
    if (with_timing) {
      std::snprintf(buf, sizeof buf, "%d,%s,%.3f,%.3f,%zu,%zu,%llu\n", r.k, acc.c_str(),
                    r.train_time_s, r.test_time_s, r.n_train, r.n_test,
                    static_cast<unsigned long long>(split_seed));
    } else {
      std::snprintf(buf, sizeof buf, "%d,%s,%zu,%zu,%llu\n", r.k, acc.c_str(), r.n_train,
                    r.n_test, static_cast<unsigned long long>(split_seed));
    }
    out += buf;
  }
  return out;
}

std::string EvalReport::to_table() const {
  std::string out =
      "Length of Sub-chain | Accuracy (%) | Train Time (s) | Test Time (s) | n_train | n_test\n"
      "--------------------+--------------+----------------+---------------+---------+-------\n";
  char buf[200];
  for (const auto& r : per_k) {
    char acc[32] = "-";
    if (r.accuracy) std::snprintf(acc, sizeof acc, "%.2f", *r.accuracy * 100.0);
    std::snprintf(buf, sizeof buf, "%19d | %12s | %14.3f | %13.3f | %7zu | %6zu\n", r.k, acc,
                  r.train_time_s, r.test_time_s, r.n_train, r.n_test);
    out += buf;
  }
  return out;
}

std::vector<SequenceCount> top_sequences(const Corpus& corpus, int k, std::size_t n) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "sequence length must be >= 1");
  std::map<std::vector<std::string>, std::uint64_t> counts;
  for (const auto& session : corpus.sessions) {
    std::vector<std::string> commands;
    commands.reserve(session.events.size());
    for (const auto& e : session.events) commands.push_back(normalize_command(e.command));
    for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= commands.size(); ++i) {
      ++counts[std::vector<std::string>(commands.begin() + static_cast<std::ptrdiff_t>(i),
                                        commands.begin() + static_cast<std::ptrdiff_t>(i) + k)];
    }
  }
  std::vector<SequenceCount> all;
  all.reserve(counts.size());
  for (auto& [seq, freq] : counts) all.push_back({seq, freq});
  // std::map already yields lexicographic order; stable sort keeps it on ties.
  std::stable_sort(all.begin(), all.end(), [](const SequenceCount& a, const SequenceCount& b) {
    return a.frequency > b.frequency;
  });
  if (all.size() > n) all.resize(n);
  return all;
}

std::vector<ScalingRow> scaling_experiment(const Corpus& corpus,
                                           const std::vector<std::size_t>& sizes, int k,
                                           std::uint64_t seed, int timing_repeats) {
  if (sizes.empty()) throw Error(ErrorCode::InsufficientData, "no sample sizes given");
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw Error(ErrorCode::InvalidArgument, "sample sizes must be ascending");
  }
  if (sizes.front() == 0) throw Error(ErrorCode::InsufficientData, "sample size 0");
  const int repeats = std::max(1, timing_repeats);

  Vocabulary vocab;
  auto pool = windows_of(build_chains(corpus, vocab), k);
  const std::size_t largest = sizes.back();
  const std::size_t held_out = (largest + 3) / 4;
  if (largest + held_out > pool.size()) {
    throw Error(ErrorCode::InsufficientData,
                "need " + std::to_string(largest + held_out) + " windows of length " +
                    std::to_string(k) + ", corpus has " + std::to_string(pool.size()));
  }
  detail::Rng rng(seed);
  rng.shuffle(pool.begin(), pool.end());

  std::vector<ScalingRow> rows;
  for (const std::size_t size : sizes) {
    const std::vector<SubChain> train(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
    const auto test_begin = pool.begin() + static_cast<std::ptrdiff_t>(largest);
    const std::vector<SubChain> test(test_begin, test_begin + static_cast<std::ptrdiff_t>((size + 3) / 4));

    ScalingRow row;
    row.size = size;
    row.n_test = test.size();
    row.train_time_s = row.test_time_s = std::numeric_limits<double>::infinity();
    FrequencyModel model;
    for (int r = 0; r < repeats; ++r) {
      const auto start = Clock::now();
      model = FrequencyModel::train(train, vocab);
      row.train_time_s = std::min(row.train_time_s, seconds_since(start));
    }
    std::vector<Token> predicted;
    for (int r = 0; r < repeats; ++r) {
      const auto start = Clock::now();
      predicted = predict_serial(model, k, test, nullptr);
      row.test_time_s = std::min(row.test_time_s, seconds_since(start));
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) correct += predicted[i] == test[i].label;
    row.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace chainwatch
