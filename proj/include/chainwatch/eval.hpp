#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chainwatch/chains.hpp"
#include "chainwatch/predictor.hpp"
#include "chainwatch/session_store.hpp"

namespace chainwatch {

/// Whole-session split. |train| = round(ratio * n), clamped to [1, n-1].
/// Both halves keep the corpus's session order.
std::pair<Corpus, Corpus> split_dataset(const Corpus& corpus, double ratio,
                                        std::uint64_t seed);

enum class SampleUnit { Windows, Sessions };

struct EvalOptions {
  int k_min = 3;
  int k_max = 11;
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
  std::optional<std::size_t> sample_limit;
  SampleUnit sample_unit = SampleUnit::Windows;
  unsigned jobs = 1;
  int timing_repeats = 3;
  bool keep_log = false;
};

struct WindowOutcome {
  TokenSeq prefix;
  Token label = 0;
  Token predicted = 0;
  bool exact = false;

  bool correct() const { return label == predicted; }
  bool operator==(const WindowOutcome&) const = default;
};

struct LengthResult {
  int k = 0;
  std::optional<double> accuracy;  // unset when n_test == 0 or no model
  std::size_t correct = 0;
  std::size_t exact_hits = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double train_time_s = 0.0;
  double test_time_s = 0.0;
  bool has_model = true;
  std::vector<WindowOutcome> log;  // filled when EvalOptions::keep_log
};

struct EvalReport {
  std::vector<LengthResult> per_k;
  std::uint64_t split_seed = 0;
  double split_ratio = 0.8;
  std::string corpus_fingerprint;
  std::size_t n_train_sessions = 0;
  std::size_t n_test_sessions = 0;
  std::optional<std::size_t> sample_limit;
  SampleUnit sample_unit = SampleUnit::Windows;

  /// JSON document; timing fields are omitted when `with_timing` is false.
  std::string to_json(bool with_timing = true) const;
  std::string to_csv(bool with_timing = true) const;
  /// Human-readable table for terminals.
  std::string to_table() const;
};

/// Content hash of the session contents (not created_at/source), hex.
std::string corpus_fingerprint(const Corpus& corpus);

/// Trains on every train window per k and predicts every test window.
EvalReport evaluate(const Corpus& train, const Corpus& test,
                    const EvalOptions& options);

/// Splits `corpus` per options and evaluates.
EvalReport run_evaluation(const Corpus& corpus, const EvalOptions& options);

struct SequenceCount {
  std::vector<std::string> commands;
  std::uint64_t frequency = 0;

  bool operator==(const SequenceCount&) const = default;
};

/// n most frequent full windows of length k; ties in lexicographic order.
std::vector<SequenceCount> top_sequences(const Corpus& corpus, int k,
                                         std::size_t n);

struct ScalingRow {
  std::size_t size = 0;
  std::size_t n_test = 0;
  double train_time_s = 0.0;
  double test_time_s = 0.0;
  double accuracy = 0.0;
};

/// For each size s, trains on s windows of length k and predicts s/4
/// held-out windows (the 80/20 proportion). Windows are drawn from one
/// seeded shuffle, so smaller samples are prefixes of larger ones.
std::vector<ScalingRow> scaling_experiment(const Corpus& corpus,
                                           const std::vector<std::size_t>& sizes,
                                           int k, std::uint64_t seed,
                                           int timing_repeats = 3);

}  // namespace chainwatch
