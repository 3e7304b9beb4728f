// chainwatch: command-chain analysis for Cowrie honeypot logs.
//
// Exit status: 0 success, 1 domain error, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chainwatch/chainwatch.h"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(cw_status status) {
  if (status != CW_OK) {
    throw DomainError(std::string(cw_status_name(status)) + ": " + cw_last_error());
  }
}

// Owning wrappers over the C handles.
struct CorpusDeleter {
  void operator()(cw_corpus* c) const { cw_corpus_free(c); }
};
struct ModelDeleter {
  void operator()(cw_model* m) const { cw_model_free(m); }
};
struct ReportDeleter {
  void operator()(cw_report* r) const { cw_report_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { cw_string_free(s); }
};
using CorpusPtr = std::unique_ptr<cw_corpus, CorpusDeleter>;
using ModelPtr = std::unique_ptr<cw_model, ModelDeleter>;
using ReportPtr = std::unique_ptr<cw_report, ReportDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

CorpusPtr load_corpus(const std::string& path) {
  cw_corpus* raw = nullptr;
  check(cw_corpus_load(path.c_str(), &raw));
  return CorpusPtr(raw);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("IoError: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw DomainError("IoError: cannot write " + path);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Flag values; unset fields fall back to the config file, then defaults.
struct Flags {
  std::string config_path;
  std::optional<int> k_min;
  std::optional<int> k_max;
  std::optional<double> ratio;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> sample_limit;
  std::optional<unsigned> jobs;
};

struct Config {
  int k_min = 3;
  int k_max = 11;
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
  std::uint64_t sample_limit = 0;
  unsigned jobs = 1;
};

Config resolve_config(const Flags& flags) {
  Config cfg;
  std::string path = flags.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("CHAINWATCH_CONFIG"); env != nullptr) path = env;
  }
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw UsageError("config file " + path + " is not a JSON object");
    }
    try {
      cfg.k_min = doc.value("k_min", cfg.k_min);
      cfg.k_max = doc.value("k_max", cfg.k_max);
      cfg.split_ratio = doc.value("split_ratio", doc.value("ratio", cfg.split_ratio));
      cfg.seed = doc.value("seed", cfg.seed);
      if (doc.contains("sample_limit") && !doc["sample_limit"].is_null()) {
        cfg.sample_limit = doc["sample_limit"].get<std::uint64_t>();
      }
      cfg.jobs = doc.value("jobs", cfg.jobs);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config file " + path + ": " + e.what());
    }
  }
  if (flags.k_min) cfg.k_min = *flags.k_min;
  if (flags.k_max) cfg.k_max = *flags.k_max;
  if (flags.ratio) cfg.split_ratio = *flags.ratio;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.sample_limit) cfg.sample_limit = *flags.sample_limit;
  if (flags.jobs) cfg.jobs = *flags.jobs;

  if (cfg.k_min < 2 || cfg.k_min > cfg.k_max) {
    throw UsageError("window lengths must satisfy 2 <= k-min <= k-max");
  }
  if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) {
    throw UsageError("--ratio must lie strictly between 0 and 1");
  }
  if (cfg.jobs == 0) throw UsageError("--jobs must be at least 1");
  return cfg;
}

void add_window_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--k-min", flags.k_min, "Shortest sub-chain length (default 3)");
  cmd->add_option("--k-max", flags.k_max, "Longest sub-chain length (default 11)");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) items.push_back(item);
  return items;
}

// ---- subcommands ----------------------------------------------------------

int run_ingest(const std::vector<std::string>& logs, const std::string& out) {
  std::vector<const char*> paths;
  for (const auto& p : logs) paths.push_back(p.c_str());
  cw_corpus* raw = nullptr;
  cw_ingest_stats stats{};
  check(cw_ingest(
      paths.data(), paths.size(),
      [](const char* diagnostic, void*) { std::fprintf(stderr, "%s\n", diagnostic); }, nullptr,
      &raw, &stats));
  CorpusPtr corpus(raw);
  std::printf("%llu events, %llu sessions, %llu errors\n",
              static_cast<unsigned long long>(stats.command_events),
              static_cast<unsigned long long>(stats.sessions),
              static_cast<unsigned long long>(stats.errors));
  if (stats.command_events == 0) {
    std::fprintf(stderr, "chainwatch: no command events found\n");
    return kExitDomain;
  }
  check(cw_corpus_save(corpus.get(), out.c_str()));
  return kExitOk;
}

int run_train(const std::string& corpus_path, const std::string& out, const Config& cfg) {
  auto corpus = load_corpus(corpus_path);
  cw_model* raw = nullptr;
  check(cw_model_train(corpus.get(), cfg.k_min, cfg.k_max, &raw));
  ModelPtr model(raw);
  for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
    std::printf("k=%d: %llu windows\n", k,
                static_cast<unsigned long long>(cw_model_window_count(model.get(), k)));
  }
  check(cw_model_save(model.get(), out.c_str()));
  return kExitOk;
}

int run_predict(const std::string& model_path, const std::vector<std::string>& commands,
                const Config& cfg) {
  const int k = static_cast<int>(commands.size()) + 1;
  if (k < cfg.k_min || k > cfg.k_max) {
    std::fprintf(stderr,
                 "chainwatch: %zu commands give a window of length %d; supply between %d and "
                 "%d commands (see --k-min/--k-max)\n",
                 commands.size(), k, cfg.k_min - 1, cfg.k_max - 1);
    return kExitDomain;
  }
  cw_model* raw = nullptr;
  check(cw_model_load(model_path.c_str(), &raw));
  ModelPtr model(raw);
  std::vector<const char*> argv;
  for (const auto& c : commands) argv.push_back(c.c_str());
  char* json = nullptr;
  check(cw_model_predict(model.get(), argv.data(), argv.size(), &json));
  StringPtr owned(json);
  std::printf("%s\n", json);
  return kExitOk;
}

int run_eval(const std::string& corpus_path, const std::string& report_path, bool by_sessions,
             int repeats, bool no_timing, const Config& cfg) {
  auto corpus = load_corpus(corpus_path);
  cw_eval_options opts;
  cw_eval_options_init(&opts);
  opts.k_min = cfg.k_min;
  opts.k_max = cfg.k_max;
  opts.split_ratio = cfg.split_ratio;
  opts.seed = cfg.seed;
  opts.sample_limit = cfg.sample_limit;
  opts.sample_by_sessions = by_sessions ? 1 : 0;
  opts.jobs = cfg.jobs;
  opts.timing_repeats = repeats;
  cw_report* raw = nullptr;
  check(cw_evaluate(corpus.get(), &opts, &raw));
  ReportPtr report(raw);

  char* table = nullptr;
  check(cw_report_table(report.get(), &table));
  StringPtr owned_table(table);
  std::fputs(table, stdout);

  if (!report_path.empty()) {
    char* text = nullptr;
    const int with_timing = no_timing ? 0 : 1;
    check(ends_with(report_path, ".csv") ? cw_report_csv(report.get(), with_timing, &text)
                                         : cw_report_json(report.get(), with_timing, &text));
    StringPtr owned(text);
    write_file(report_path, text);
  }
  return kExitOk;
}

int run_top(const std::string& corpus_path, int k, std::size_t n, bool as_json) {
  auto corpus = load_corpus(corpus_path);
  char* json = nullptr;
  check(cw_top_sequences(corpus.get(), k, n, &json));
  StringPtr owned(json);
  if (as_json) {
    std::printf("%s\n", json);
    return kExitOk;
  }
  for (const auto& row : nlohmann::json::parse(json)) {
    std::string line;
    for (const auto& c : row["commands"]) {
      line += (line.empty() ? "" : " - ") + c.get<std::string>();
    }
    std::printf("%llu\t%s\n", static_cast<unsigned long long>(row["frequency"].get<std::uint64_t>()),
                line.c_str());
  }
  return kExitOk;
}

int run_gen(const std::string& spec_path, bool use_default, std::optional<std::uint64_t> seed,
            std::optional<std::uint32_t> sessions, std::optional<double> noise,
            const std::string& out, bool print_spec) {
  if (use_default == !spec_path.empty()) {
    throw UsageError("gen needs exactly one of --spec FILE or --default");
  }
  std::string spec_json;
  if (use_default) {
    char* text = nullptr;
    check(cw_spec_default_json(seed.value_or(0), &text));
    StringPtr owned(text);
    spec_json = text;
  } else {
    spec_json = read_file(spec_path);
  }
  if (sessions || noise) {
    auto doc = nlohmann::json::parse(spec_json, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DomainError("InvalidSpec: not JSON");
    if (sessions) doc["n_sessions"] = *sessions;
    if (noise) doc["noise"] = *noise;
    spec_json = doc.dump(2);
  }
  if (print_spec) {
    auto doc = nlohmann::json::parse(spec_json, nullptr, false);
    if (!doc.is_discarded() && seed) doc["seed"] = *seed;
    std::printf("%s\n", doc.is_discarded() ? spec_json.c_str() : doc.dump(2).c_str());
    if (out.empty()) return kExitOk;
  }
  if (out.empty()) throw UsageError("gen needs --out");
  cw_corpus* raw = nullptr;
  check(cw_generate(spec_json.c_str(), seed ? 1 : 0, seed.value_or(0), &raw));
  CorpusPtr corpus(raw);
  check(cw_corpus_save(corpus.get(), out.c_str()));
  std::printf("%zu sessions, %zu events\n", cw_corpus_session_count(corpus.get()),
              cw_corpus_event_count(corpus.get()));
  return kExitOk;
}

int run_scale(const std::string& corpus_path, const std::string& sizes_text, int k,
              std::uint64_t seed) {
  std::vector<std::uint64_t> sizes;
  for (const auto& s : split_list(sizes_text)) {
    try {
      sizes.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw UsageError("bad size '" + s + "' in --sizes");
    }
  }
  auto corpus = load_corpus(corpus_path);
  char* json = nullptr;
  check(cw_scaling(corpus.get(), sizes.data(), sizes.size(), k, seed, &json));
  StringPtr owned(json);
  std::printf("%8s %8s %14s %14s %10s\n", "size", "n_test", "train_time_s", "test_time_s",
              "accuracy");
  for (const auto& row : nlohmann::json::parse(json)) {
    std::printf("%8llu %8llu %14.6f %14.6f %9.2f%%\n",
                static_cast<unsigned long long>(row["size"].get<std::uint64_t>()),
                static_cast<unsigned long long>(row["n_test"].get<std::uint64_t>()),
                row["train_time_s"].get<double>(), row["test_time_s"].get<double>(),
                row["accuracy"].get<double>() * 100.0);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstruct attacker command chains from Cowrie logs and predict the next command"};
  app.set_version_flag("--version", std::string(cw_version()));
  app.require_subcommand(1);

  Flags flags;
  app.add_option("--config", flags.config_path,
                 "JSON config file (default: $CHAINWATCH_CONFIG)");

  std::vector<std::string> logs;
  std::string out;
  std::string corpus_path;
  std::string model_path;

  auto* ingest = app.add_subcommand("ingest", "Parse Cowrie JSON logs into a session corpus");
  ingest->add_option("logs", logs, "Log files (plain or gzip; '-' for stdin)")->required();
  ingest->add_option("--out", out, "Corpus file to write")->required();

  auto* train = app.add_subcommand("train", "Train the sub-chain frequency model");
  train->add_option("--corpus", corpus_path, "Corpus file")->required();
  train->add_option("--out", out, "Model file to write")->required();
  add_window_flags(train, flags);

  std::string commands_text;
  std::vector<std::string> command_list;
  auto* predict = app.add_subcommand("predict", "Predict the next command for a prefix");
  predict->add_option("--model", model_path, "Model file")->required();
  auto* commands_opt =
      predict->add_option("--commands", commands_text, "Comma-separated command prefix");
  predict->add_option("--command", command_list, "One prefix command (repeatable)")
      ->excludes(commands_opt);
  add_window_flags(predict, flags);

  std::string report_path;
  std::string sample_unit = "windows";
  int repeats = 3;
  bool no_timing = false;
  auto* eval = app.add_subcommand("eval", "Split, train and score next-command accuracy per length");
  eval->add_option("--corpus", corpus_path, "Corpus file")->required();
  eval->add_option("--report", report_path, "Write report (.json or .csv)");
  add_window_flags(eval, flags);
  eval->add_option("--ratio", flags.ratio, "Training share of sessions (default 0.8)");
  eval->add_option("--seed", flags.seed, "Split seed (default 0)");
  eval->add_option("--sample-limit", flags.sample_limit, "Cap on samples per length");
  eval->add_option("--sample-unit", sample_unit, "What --sample-limit counts")
      ->check(CLI::IsMember({"windows", "sessions"}));
  eval->add_option("--jobs", flags.jobs, "Prediction threads (results identical for any N)");
  eval->add_option("--repeats", repeats, "Timing runs, best-of (default 3)")
      ->check(CLI::PositiveNumber);
  eval->add_flag("--no-timing", no_timing, "Omit timing fields from the report file");

  int top_k = 6;
  std::size_t top_n = 5;
  bool top_json = false;
  auto* top = app.add_subcommand("top", "Most frequent command sequences of one length");
  top->add_option("--corpus", corpus_path, "Corpus file")->required();
  top->add_option("-k,--length", top_k, "Sequence length")->check(CLI::PositiveNumber);
  top->add_option("-n,--count", top_n, "How many sequences");
  top->add_flag("--json", top_json, "Print JSON");

  std::string spec_path;
  bool use_default = false;
  bool print_spec = false;
  std::optional<std::uint64_t> gen_seed;
  std::optional<std::uint32_t> gen_sessions;
  std::optional<double> gen_noise;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic Mirai-like corpus");
  gen->add_option("--spec", spec_path, "Generator spec (JSON)");
  gen->add_flag("--default", use_default, "Use the built-in Mirai-like spec");
  gen->add_option("--seed", gen_seed, "Override the spec seed");
  gen->add_option("--sessions", gen_sessions, "Override the session count");
  gen->add_option("--noise", gen_noise, "Override the noise probability");
  gen->add_option("--out", out, "Corpus file to write");
  gen->add_flag("--print-spec", print_spec, "Print the effective spec JSON");

  std::string sizes_text = "5000,10000,20000";
  int scale_k = 5;
  std::uint64_t scale_seed = 0;
  auto* scale = app.add_subcommand("scale", "Train/test timing against sample size");
  scale->add_option("--corpus", corpus_path, "Corpus file")->required();
  scale->add_option("--sizes", sizes_text, "Comma-separated ascending window counts");
  scale->add_option("-k,--length", scale_k, "Sub-chain length (default 5)");
  scale->add_option("--seed", scale_seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) return run_ingest(logs, out);
    const Config cfg = resolve_config(flags);
    if (*train) return run_train(corpus_path, out, cfg);
    if (*predict) {
      auto commands = command_list.empty() ? split_list(commands_text) : command_list;
      return run_predict(model_path, commands, cfg);
    }
    if (*eval) {
      return run_eval(corpus_path, report_path, sample_unit == "sessions", repeats, no_timing, cfg);
    }
    if (*top) return run_top(corpus_path, top_k, top_n, top_json);
    if (*gen) {
      return run_gen(spec_path, use_default, gen_seed, gen_sessions, gen_noise, out, print_spec);
    }
    if (*scale) return run_scale(corpus_path, sizes_text, scale_k, scale_seed);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "chainwatch: %s\n", e.what());
    return kExitUsage;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "chainwatch: %s\n", e.what());
    return kExitDomain;
  }
  return kExitUsage;
}
