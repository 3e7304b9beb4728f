#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "chainwatch/chains.hpp"

namespace chainwatch {

std::size_t levenshtein(std::span<const Token> a, std::span<const Token> b);

/// Same as levenshtein() but gives up once the distance provably exceeds
/// `limit`, returning limit + 1 in that case.
std::size_t levenshtein_bounded(std::span<const Token> a,
                                std::span<const Token> b, std::size_t limit);

/// Edit distance over the summed lengths, kept as an exact fraction so ties
/// compare exactly. 0/0 is treated as 0.
struct NormalizedDistance {
  std::uint64_t edits = 0;
  std::uint64_t total_length = 0;

  double value() const {
    return total_length == 0 ? 0.0
                             : static_cast<double>(edits) /
                                   static_cast<double>(total_length);
  }

  friend bool operator==(const NormalizedDistance& a,
                         const NormalizedDistance& b) {
    return (a <=> b) == 0;
  }
  friend std::strong_ordering operator<=>(const NormalizedDistance& a,
                                          const NormalizedDistance& b) {
    const std::uint64_t ad = a.total_length == 0 ? 1 : a.total_length;
    const std::uint64_t bd = b.total_length == 0 ? 1 : b.total_length;
    return a.edits * bd <=> b.edits * ad;
  }
};

NormalizedDistance normalized_levenshtein(std::span<const Token> a,
                                          std::span<const Token> b);

struct TokenSeqHash {
  std::size_t operator()(const TokenSeq& seq) const noexcept;
};

struct LabelCount {
  Token label = 0;
  std::uint64_t count = 0;

  bool operator==(const LabelCount&) const = default;
};

struct PrefixEntry {
  TokenSeq prefix;
  std::vector<LabelCount> labels;  // ascending label
  std::uint64_t total = 0;         // sum of label counts

  bool operator==(const PrefixEntry&) const = default;
};

/// All prefixes of one window length, sorted lexicographically, with a hash
/// index for exact lookups.
class PrefixTable {
 public:
  PrefixTable() = default;
  explicit PrefixTable(std::vector<PrefixEntry> entries);

  const std::vector<PrefixEntry>& entries() const { return entries_; }
  const PrefixEntry* find(const TokenSeq& prefix) const;
  std::uint64_t window_count() const { return window_count_; }
  bool empty() const { return entries_.empty(); }

  bool operator==(const PrefixTable& other) const {
    return entries_ == other.entries_;
  }

 private:
  std::vector<PrefixEntry> entries_;
  std::unordered_map<TokenSeq, std::size_t, TokenSeqHash> index_;
  std::uint64_t window_count_ = 0;
};

/// Nested prefix -> (label -> count) tables, one per window length.
class FrequencyModel {
 public:
  FrequencyModel() = default;
  FrequencyModel(Vocabulary vocab, std::map<int, PrefixTable> tables);

  /// Counts every (prefix, label) pair. Throws EmptyTrainingSet on no input
  /// and InvalidArgument on malformed windows or tokens outside `vocab`.
  static FrequencyModel train(const std::vector<SubChain>& subchains,
                              Vocabulary vocab);

  const Vocabulary& vocab() const { return vocab_; }
  const std::map<int, PrefixTable>& tables() const { return tables_; }
  bool has_length(int k) const { return tables_.contains(k); }
  /// Throws NoModelForLength.
  const PrefixTable& table(int k) const;
  std::uint64_t trained_on(int k) const;

  bool operator==(const FrequencyModel&) const = default;

 private:
  Vocabulary vocab_;
  std::map<int, PrefixTable> tables_;
};

enum class ScanMode { Auto, FullScan };

struct PrefixMatch {
  const PrefixEntry* entry = nullptr;
  NormalizedDistance distance;
  std::size_t ties = 0;  // stored prefixes at the minimal distance
  bool exact = false;
};

/// Nearest stored prefix by normalized distance; ties go to the higher total
/// frequency, then the lexicographically smaller prefix. Auto mode answers
/// exact keys through the hash index.
PrefixMatch match_prefix(const PrefixTable& table, const TokenSeq& query,
                         ScanMode mode = ScanMode::Auto);
PrefixMatch match_prefix(const FrequencyModel& model, int k,
                         const TokenSeq& query, ScanMode mode = ScanMode::Auto);

struct Prediction {
  Token predicted = 0;
  std::string predicted_command;
  TokenSeq matched_prefix;
  NormalizedDistance distance;
  std::uint64_t match_frequency = 0;  // total count of the matched prefix
  std::uint64_t label_count = 0;      // count of the predicted label
  std::size_t distance_ties = 0;
  bool exact = false;

  bool operator==(const Prediction&) const = default;
};

Prediction predict_next(const FrequencyModel& model, int k,
                        const TokenSeq& query, ScanMode mode = ScanMode::Auto);

/// Maps commands to model tokens. Unknown commands get fresh ids past the
/// vocabulary (one per distinct string), so they never equal a stored token.
TokenSeq encode_query(const Vocabulary& vocab,
                      const std::vector<std::string>& commands);

inline constexpr int kModelFormatVersion = 1;

void save_model(const FrequencyModel& model, const std::string& path);
FrequencyModel load_model(const std::string& path);

std::string model_to_json(const FrequencyModel& model);
FrequencyModel model_from_json(const std::string& text);

}  // namespace chainwatch
