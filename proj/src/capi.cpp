#include "chainwatch/chainwatch.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "chainwatch/eval.hpp"
#include "chainwatch/ingest.hpp"
#include "chainwatch/predictor.hpp"
#include "chainwatch/session_store.hpp"
#include "chainwatch/synth.hpp"
#include "json.hpp"

struct cw_corpus {
  chainwatch::Corpus value;
};

struct cw_model {
  chainwatch::FrequencyModel value;
};

struct cw_report {
  chainwatch::EvalReport value;
};

namespace {

using chainwatch::Error;
using chainwatch::ErrorCode;

thread_local std::string last_error;

cw_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Ok: return CW_OK;
    case ErrorCode::MalformedJson: return CW_ERR_MALFORMED_JSON;
    case ErrorCode::MissingField: return CW_ERR_MISSING_FIELD;
    case ErrorCode::BadTimestamp: return CW_ERR_BAD_TIMESTAMP;
    case ErrorCode::IoError: return CW_ERR_IO;
    case ErrorCode::FormatVersionMismatch: return CW_ERR_FORMAT_VERSION;
    case ErrorCode::EmptyTrainingSet: return CW_ERR_EMPTY_TRAINING_SET;
    case ErrorCode::NoModelForLength: return CW_ERR_NO_MODEL_FOR_LENGTH;
    case ErrorCode::EmptyPrefixTable: return CW_ERR_EMPTY_PREFIX_TABLE;
    case ErrorCode::TooFewSessions: return CW_ERR_TOO_FEW_SESSIONS;
    case ErrorCode::InsufficientData: return CW_ERR_INSUFFICIENT_DATA;
    case ErrorCode::InvalidSpec: return CW_ERR_INVALID_SPEC;
    case ErrorCode::InvalidArgument: return CW_ERR_INVALID_ARGUMENT;
  }
  return CW_ERR_INTERNAL;
}

template <typename F>
cw_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return CW_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown exception";
  }
  return CW_ERR_INTERNAL;
}

void require(bool condition, const char* what) {
  if (!condition) throw Error(ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

}  // namespace

extern "C" {

const char* cw_version(void) { return "1.0.0"; }

const char* cw_status_name(cw_status status) {
  switch (status) {
    case CW_OK: return "ok";
    case CW_ERR_MALFORMED_JSON: return "MalformedJson";
    case CW_ERR_MISSING_FIELD: return "MissingField";
    case CW_ERR_BAD_TIMESTAMP: return "BadTimestamp";
    case CW_ERR_IO: return "IoError";
    case CW_ERR_FORMAT_VERSION: return "FormatVersionMismatch";
    case CW_ERR_EMPTY_TRAINING_SET: return "EmptyTrainingSet";
    case CW_ERR_NO_MODEL_FOR_LENGTH: return "NoModelForLength";
    case CW_ERR_EMPTY_PREFIX_TABLE: return "EmptyPrefixTable";
    case CW_ERR_TOO_FEW_SESSIONS: return "TooFewSessions";
    case CW_ERR_INSUFFICIENT_DATA: return "InsufficientData";
    case CW_ERR_INVALID_SPEC: return "InvalidSpec";
    case CW_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case CW_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* cw_last_error(void) { return last_error.c_str(); }

void cw_string_free(char* str) { std::free(str); }

cw_status cw_ingest(const char* const* paths, size_t n_paths, cw_diagnostic_fn on_diagnostic,
                    void* user, cw_corpus** out, cw_ingest_stats* stats) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    require(paths != nullptr || n_paths == 0, "paths is null");
    chainwatch::IngestStats totals;
    std::uint64_t sequence = 0;
    std::vector<chainwatch::CowrieEvent> commands;
    std::string source;
    const chainwatch::DiagnosticSink sink = [&](const chainwatch::Diagnostic& d) {
      if (on_diagnostic) on_diagnostic(d.to_string().c_str(), user);
    };
    for (size_t i = 0; i < n_paths; ++i) {
      require(paths[i] != nullptr, "null path");
      auto src = chainwatch::LineSource::open(paths[i]);
      auto events = chainwatch::filter_command_events(
          chainwatch::read_events(*src, sequence, totals, sink));
      commands.insert(commands.end(), std::make_move_iterator(events.begin()),
                      std::make_move_iterator(events.end()));
      source += (source.empty() ? "" : ",") + src->name();
    }
    auto corpus = std::make_unique<cw_corpus>();
    corpus->value =
        chainwatch::group_sessions(commands, "ingest:" + source, chainwatch::now_utc());
    if (stats != nullptr) {
      stats->lines = totals.lines;
      stats->events = totals.events;
      stats->command_events = totals.command_events;
      stats->sessions = corpus->value.sessions.size();
      stats->errors = totals.errors;
    }
    *out = corpus.release();
  });
}

cw_status cw_corpus_load(const char* path, cw_corpus** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new cw_corpus{chainwatch::load_corpus(path)};
  });
}

cw_status cw_corpus_save(const cw_corpus* corpus, const char* path) {
  return guarded([&] {
    require(corpus != nullptr && path != nullptr, "null argument");
    chainwatch::save_corpus(corpus->value, path);
  });
}

size_t cw_corpus_session_count(const cw_corpus* corpus) {
  return corpus ? corpus->value.sessions.size() : 0;
}

size_t cw_corpus_event_count(const cw_corpus* corpus) {
  return corpus ? corpus->value.event_count() : 0;
}

void cw_corpus_free(cw_corpus* corpus) { delete corpus; }

cw_status cw_spec_default_json(uint64_t seed, char** out_json) {
  return guarded([&] {
    require(out_json != nullptr, "out is null");
    *out_json = dup_string(chainwatch::spec_to_json(chainwatch::default_mirai_like_spec(seed)));
  });
}

cw_status cw_generate(const char* spec_json, int has_seed, uint64_t seed, cw_corpus** out) {
  return guarded([&] {
    require(spec_json != nullptr && out != nullptr, "null argument");
    auto spec = chainwatch::spec_from_json(spec_json);
    if (has_seed) spec.seed = seed;
    *out = new cw_corpus{chainwatch::generate(spec)};
  });
}

cw_status cw_model_train(const cw_corpus* corpus, int k_min, int k_max, cw_model** out) {
  return guarded([&] {
    require(corpus != nullptr && out != nullptr, "null argument");
    require(k_min >= 2 && k_min <= k_max, "window range must satisfy 2 <= k_min <= k_max");
    chainwatch::Vocabulary vocab;
    const auto chains = chainwatch::build_chains(corpus->value, vocab);
    std::vector<chainwatch::SubChain> windows;
    for (int k = k_min; k <= k_max; ++k) {
      for (const auto& chain : chains) {
        auto w = chainwatch::split_subchains(chain, k);
        windows.insert(windows.end(), std::make_move_iterator(w.begin()),
                       std::make_move_iterator(w.end()));
      }
    }
    *out = new cw_model{chainwatch::FrequencyModel::train(windows, std::move(vocab))};
  });
}

cw_status cw_model_load(const char* path, cw_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new cw_model{chainwatch::load_model(path)};
  });
}

cw_status cw_model_save(const cw_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null argument");
    chainwatch::save_model(model->value, path);
  });
}

uint64_t cw_model_window_count(const cw_model* model, int k) {
  return model ? model->value.trained_on(k) : 0;
}

int cw_model_k_min(const cw_model* model) {
  if (!model || model->value.tables().empty()) return 0;
  return model->value.tables().begin()->first;
}

int cw_model_k_max(const cw_model* model) {
  if (!model || model->value.tables().empty()) return 0;
  return model->value.tables().rbegin()->first;
}

size_t cw_model_vocab_size(const cw_model* model) {
  return model ? model->value.vocab().size() : 0;
}

void cw_model_free(cw_model* model) { delete model; }

cw_status cw_model_predict(const cw_model* model, const char* const* commands, size_t n_commands,
                           char** out_json) {
  return guarded([&] {
    require(model != nullptr && out_json != nullptr, "null argument");
    require(commands != nullptr || n_commands == 0, "commands is null");
    std::vector<std::string> list;
    for (size_t i = 0; i < n_commands; ++i) {
      require(commands[i] != nullptr, "null command");
      list.emplace_back(commands[i]);
    }
    const auto& m = model->value;
    const int k = static_cast<int>(n_commands) + 1;
    const auto query = chainwatch::encode_query(m.vocab(), list);
    const auto p = chainwatch::predict_next(m, k, query);

    nlohmann::json matched = nlohmann::json::array();
    for (const auto t : p.matched_prefix) matched.push_back(m.vocab().command(t));
    const nlohmann::json doc = {{"k", k},
                                {"predicted_command", p.predicted_command},
                                {"predicted", p.predicted},
                                {"matched_prefix", p.matched_prefix},
                                {"matched_commands", std::move(matched)},
                                {"distance", p.distance.value()},
                                {"distance_edits", p.distance.edits},
                                {"distance_total", p.distance.total_length},
                                {"match_frequency", p.match_frequency},
                                {"label_count", p.label_count},
                                {"distance_ties", p.distance_ties},
                                {"exact", p.exact}};
    *out_json = dup_string(doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
  });
}

void cw_eval_options_init(cw_eval_options* options) {
  if (options == nullptr) return;
  const chainwatch::EvalOptions defaults;
  options->k_min = defaults.k_min;
  options->k_max = defaults.k_max;
  options->split_ratio = defaults.split_ratio;
  options->seed = defaults.seed;
  options->sample_limit = 0;
  options->sample_by_sessions = 0;
  options->jobs = defaults.jobs;
  options->timing_repeats = defaults.timing_repeats;
}

cw_status cw_evaluate(const cw_corpus* corpus, const cw_eval_options* options, cw_report** out) {
  return guarded([&] {
    require(corpus != nullptr && out != nullptr, "null argument");
    cw_eval_options c;
    cw_eval_options_init(&c);
    if (options != nullptr) c = *options;
    chainwatch::EvalOptions o;
    o.k_min = c.k_min;
    o.k_max = c.k_max;
    o.split_ratio = c.split_ratio;
    o.seed = c.seed;
    if (c.sample_limit > 0) o.sample_limit = static_cast<std::size_t>(c.sample_limit);
    o.sample_unit = c.sample_by_sessions ? chainwatch::SampleUnit::Sessions
                                         : chainwatch::SampleUnit::Windows;
    o.jobs = c.jobs;
    o.timing_repeats = c.timing_repeats;
    *out = new cw_report{chainwatch::run_evaluation(corpus->value, o)};
  });
}

cw_status cw_report_json(const cw_report* report, int with_timing, char** out) {
  return guarded([&] {
    require(report != nullptr && out != nullptr, "null argument");
    *out = dup_string(report->value.to_json(with_timing != 0));
  });
}

cw_status cw_report_csv(const cw_report* report, int with_timing, char** out) {
  return guarded([&] {
    require(report != nullptr && out != nullptr, "null argument");
    *out = dup_string(report->value.to_csv(with_timing != 0));
  });
}

cw_status cw_report_table(const cw_report* report, char** out) {
  return guarded([&] {
    require(report != nullptr && out != nullptr, "null argument");
    *out = dup_string(report->value.to_table());
  });
}

void cw_report_free(cw_report* report) { delete report; }

cw_status cw_top_sequences(const cw_corpus* corpus, int k, size_t n, char** out_json) {
  return guarded([&] {
    require(corpus != nullptr && out_json != nullptr, "null argument");
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : chainwatch::top_sequences(corpus->value, k, n)) {
      rows.push_back({{"commands", s.commands}, {"frequency", s.frequency}});
    }
    *out_json = dup_string(rows.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
  });
}

cw_status cw_scaling(const cw_corpus* corpus, const uint64_t* sizes, size_t n_sizes, int k,
                     uint64_t seed, char** out_json) {
  return guarded([&] {
    require(corpus != nullptr && out_json != nullptr, "null argument");
    require(sizes != nullptr || n_sizes == 0, "sizes is null");
    const std::vector<std::size_t> list(sizes, sizes + n_sizes);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : chainwatch::scaling_experiment(corpus->value, list, k, seed)) {
      rows.push_back({{"size", r.size},
                      {"n_test", r.n_test},
                      {"train_time_s", r.train_time_s},
                      {"test_time_s", r.test_time_s},
                      {"accuracy", r.accuracy}});
    }
    *out_json = dup_string(rows.dump());
  });
}

}  // extern "C"
