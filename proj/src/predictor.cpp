#include "chainwatch/predictor.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace chainwatch {

std::size_t levenshtein(std::span<const Token> a, std::span<const Token> b) {
  return levenshtein_bounded(a, b, std::numeric_limits<std::size_t>::max() - 1);
}

std::size_t levenshtein_bounded(std::span<const Token> a,
                                std::span<const Token> b, std::size_t limit) {
  if (a.size() < b.size()) std::swap(a, b);
  if (a.size() - b.size() > limit) return limit + 1;
  if (b.empty()) return a.size();

  // Two-row DP over the shorter sequence.
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    std::size_t row_min = cur[0];
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > limit) return limit + 1;
    std::swap(prev, cur);
  }
  return std::min(prev[b.size()], limit + 1);
}

NormalizedDistance normalized_levenshtein(std::span<const Token> a,
                                          std::span<const Token> b) {
  return {levenshtein(a, b), a.size() + b.size()};
}

std::size_t TokenSeqHash::operator()(const TokenSeq& seq) const noexcept {
  std::size_t h = seq.size();
  for (const Token t : seq) {
    h ^= std::hash<Token>{}(t) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

PrefixTable::PrefixTable(std::vector<PrefixEntry> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const PrefixEntry& a, const PrefixEntry& b) {
              return a.prefix < b.prefix;
            });
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& entry = entries_[i];
    std::sort(entry.labels.begin(), entry.labels.end(),
              [](const LabelCount& a, const LabelCount& b) {
                return a.label < b.label;
              });
    entry.total = 0;
    for (std::size_t j = 0; j < entry.labels.size(); ++j) {
      if (entry.labels[j].count == 0) {
        throw Error(ErrorCode::InvalidArgument, "zero label count in prefix table");
      }
      if (j > 0 && entry.labels[j].label == entry.labels[j - 1].label) {
        throw Error(ErrorCode::InvalidArgument, "duplicate label in prefix table");
      }
      entry.total += entry.labels[j].count;
    }
    if (entry.labels.empty()) {
      throw Error(ErrorCode::InvalidArgument, "prefix without labels");
    }
    if (!index_.emplace(entry.prefix, i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate prefix in table");
    }
    window_count_ += entry.total;
  }
}

const PrefixEntry* PrefixTable::find(const TokenSeq& prefix) const {
  const auto it = index_.find(prefix);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

FrequencyModel::FrequencyModel(Vocabulary vocab, std::map<int, PrefixTable> tables)
    : vocab_(std::move(vocab)), tables_(std::move(tables)) {
  for (const auto& [k, table] : tables_) {
    for (const auto& entry : table.entries()) {
      if (entry.prefix.size() != static_cast<std::size_t>(k - 1)) {
        throw Error(ErrorCode::InvalidArgument,
                    "prefix length does not match window length " + std::to_string(k));
      }
      const auto out_of_range = [&](Token t) { return t >= vocab_.size(); };
      if (std::any_of(entry.prefix.begin(), entry.prefix.end(), out_of_range) ||
          std::any_of(entry.labels.begin(), entry.labels.end(),
                      [&](const LabelCount& l) { return out_of_range(l.label); })) {
        throw Error(ErrorCode::InvalidArgument, "token outside vocabulary");
      }
    }
  }
}

FrequencyModel FrequencyModel::train(const std::vector<SubChain>& subchains,
                                     Vocabulary vocab) {
  if (subchains.empty()) {
    throw Error(ErrorCode::EmptyTrainingSet, "no sub-chains to train on");
  }
  std::map<int, std::unordered_map<TokenSeq, std::map<Token, std::uint64_t>, TokenSeqHash>>
      counts;
  for (const auto& sc : subchains) {
    if (sc.k < 2 || sc.prefix.size() != static_cast<std::size_t>(sc.k - 1)) {
      throw Error(ErrorCode::InvalidArgument, "malformed sub-chain");
    }
    ++counts[sc.k][sc.prefix][sc.label];
  }

  std::map<int, PrefixTable> tables;
  for (auto& [k, by_prefix] : counts) {
    std::vector<PrefixEntry> entries;
    entries.reserve(by_prefix.size());
    for (auto& [prefix, labels] : by_prefix) {
      PrefixEntry entry{prefix, {}, 0};
      entry.labels.reserve(labels.size());
      for (const auto& [label, count] : labels) entry.labels.push_back({label, count});
      entries.push_back(std::move(entry));
    }
    tables.emplace(k, PrefixTable(std::move(entries)));
  }
  return FrequencyModel(std::move(vocab), std::move(tables));
}

const PrefixTable& FrequencyModel::table(int k) const {
  const auto it = tables_.find(k);
  if (it == tables_.end()) {
    throw Error(ErrorCode::NoModelForLength,
                "model has no table for window length " + std::to_string(k));
  }
  return it->second;
}

std::uint64_t FrequencyModel::trained_on(int k) const {
  const auto it = tables_.find(k);
  return it == tables_.end() ? 0 : it->second.window_count();
}

PrefixMatch match_prefix(const PrefixTable& table, const TokenSeq& query,
                         ScanMode mode) {
  if (table.empty()) {
    throw Error(ErrorCode::EmptyPrefixTable, "prefix table is empty");
  }
  if (mode == ScanMode::Auto) {
    if (const PrefixEntry* hit = table.find(query)) {
      return PrefixMatch{hit, {0, 2 * query.size()}, 1, true};
    }
  }

  PrefixMatch best;
  for (const auto& entry : table.entries()) {
    const std::size_t total = query.size() + entry.prefix.size();
    std::size_t limit = std::numeric_limits<std::size_t>::max() - 1;
    if (best.entry != nullptr) {
      // Largest edit count that still ties the current best.
      limit = best.distance.total_length == 0
                  ? 0
                  : best.distance.edits * total / best.distance.total_length;
    }
    const std::size_t edits = levenshtein_bounded(query, entry.prefix, limit);
    if (edits > limit) continue;
    const NormalizedDistance d{edits, total};
    if (best.entry == nullptr || d < best.distance) {
      best = PrefixMatch{&entry, d, 1, edits == 0};
    } else if (d == best.distance) {
      ++best.ties;
      if (entry.total > best.entry->total) best.entry = &entry;
    }
  }
  return best;
}

PrefixMatch match_prefix(const FrequencyModel& model, int k,
                         const TokenSeq& query, ScanMode mode) {
  return match_prefix(model.table(k), query, mode);
}

Prediction predict_next(const FrequencyModel& model, int k,
                        const TokenSeq& query, ScanMode mode) {
  const PrefixTable& table = model.table(k);
  if (query.size() != static_cast<std::size_t>(k - 1)) {
    throw Error(ErrorCode::InvalidArgument,
                "query of " + std::to_string(query.size()) +
                    " commands does not fit window length " + std::to_string(k));
  }
  const PrefixMatch match = match_prefix(table, query, mode);
  const auto& labels = match.entry->labels;
  // Labels are ascending, so max_element keeps the smallest token on ties.
  const auto top = std::max_element(
      labels.begin(), labels.end(),
      [](const LabelCount& a, const LabelCount& b) { return a.count < b.count; });

  Prediction p;
  p.predicted = top->label;
  p.predicted_command = model.vocab().command(top->label);
  p.matched_prefix = match.entry->prefix;
  p.distance = match.distance;
  p.match_frequency = match.entry->total;
  p.label_count = top->count;
  p.distance_ties = match.ties;
  p.exact = match.exact;
  return p;
}

TokenSeq encode_query(const Vocabulary& vocab,
                      const std::vector<std::string>& commands) {
  std::unordered_map<std::string, Token> unknown;
  TokenSeq tokens;
  tokens.reserve(commands.size());
  for (const auto& c : commands) {
    if (const auto t = vocab.find(c)) {
      tokens.push_back(*t);
      continue;
    }
    const auto fresh = static_cast<Token>(vocab.size() + unknown.size());
    tokens.push_back(unknown.emplace(normalize_command(c), fresh).first->second);
  }
  return tokens;
}

namespace {

using nlohmann::json;
constexpr std::string_view kModelFormat = "chainwatch-model";

[[noreturn]] void corrupt_model(const std::string& why) {
  throw Error(ErrorCode::IoError, "corrupt model: " + why);
}

}  // namespace

std::string model_to_json(const FrequencyModel& model) {
  bool any = false;
  for (const auto& [k, table] : model.tables()) any = any || !table.empty();
  if (!any) throw Error(ErrorCode::EmptyTrainingSet, "refusing to save an empty model");

  json k_tables = json::object();
  json trained_on = json::object();
  for (const auto& [k, table] : model.tables()) {
    json rows = json::array();
    for (const auto& entry : table.entries()) {
      json labels = json::object();
      for (const auto& l : entry.labels) labels[std::to_string(l.label)] = l.count;
      rows.push_back({{"prefix", entry.prefix}, {"labels", std::move(labels)}});
    }
    k_tables[std::to_string(k)] = std::move(rows);
    trained_on[std::to_string(k)] = table.window_count();
  }
  const json doc = {{"format", kModelFormat},
                    {"version", kModelFormatVersion},
                    {"vocab", model.vocab().commands()},
                    {"k_tables", std::move(k_tables)},
                    {"trained_on", std::move(trained_on)}};
  return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

FrequencyModel model_from_json(const std::string& text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) corrupt_model("not valid JSON");
  if (!doc.is_object() || doc.value("format", "") != kModelFormat) {
    throw Error(ErrorCode::FormatVersionMismatch, "not a chainwatch model");
  }
  const auto version = doc.find("version");
  if (version == doc.end() || !version->is_number_integer() ||
      version->get<int>() != kModelFormatVersion) {
    throw Error(ErrorCode::FormatVersionMismatch,
                "unsupported model version " +
                    (version == doc.end() ? std::string("(none)") : version->dump()));
  }
  try {
    Vocabulary vocab(doc.at("vocab").get<std::vector<std::string>>());
    std::map<int, PrefixTable> tables;
    for (const auto& [key, rows] : doc.at("k_tables").items()) {
      const int k = std::stoi(key);
      if (k < 2) corrupt_model("window length " + key);
      std::vector<PrefixEntry> entries;
      for (const auto& row : rows) {
        PrefixEntry entry;
        entry.prefix = row.at("prefix").get<TokenSeq>();
        for (const auto& [label, count] : row.at("labels").items()) {
          entry.labels.push_back(
              {static_cast<Token>(std::stoul(label)), count.get<std::uint64_t>()});
        }
        entries.push_back(std::move(entry));
      }
      PrefixTable table(std::move(entries));
      if (const auto t = doc.find("trained_on"); t != doc.end() && t->contains(key) &&
                                                  (*t)[key].get<std::uint64_t>() !=
                                                      table.window_count()) {
        corrupt_model("trained_on disagrees with counts for k=" + key);
      }
      tables.emplace(k, std::move(table));
    }
    return FrequencyModel(std::move(vocab), std::move(tables));
  } catch (const json::exception& e) {
    corrupt_model(e.what());
  } catch (const std::logic_error& e) {  // stoi/stoul
    corrupt_model(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) corrupt_model(e.what());
    throw;
  }
}

void save_model(const FrequencyModel& model, const std::string& path) {
  const std::string text = model_to_json(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

FrequencyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path);
  return model_from_json(buf.str());
}

}  // namespace chainwatch
