#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <string>
#include <vector>

#include "chainwatch/chainwatch.h"
#include "json.hpp"
#include "test_support.hpp"

using nlohmann::json;
using chainwatch::testing::data_path;
using chainwatch::testing::TempFile;
using chainwatch::testing::write_all;

namespace {

// Takes ownership of a library-allocated string.
std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  cw_string_free(s);
  return out;
}

cw_corpus* synthetic(uint64_t seed, double noise = 0.05, unsigned sessions = 1000) {
  char* spec_text = nullptr;
  REQUIRE(cw_spec_default_json(seed, &spec_text) == CW_OK);
  auto spec = json::parse(take(spec_text));
  spec["noise"] = noise;
  spec["n_sessions"] = sessions;
  cw_corpus* corpus = nullptr;
  REQUIRE(cw_generate(spec.dump().c_str(), 0, 0, &corpus) == CW_OK);
  return corpus;
}

void collect(const char* diagnostic, void* user) {
  static_cast<std::vector<std::string>*>(user)->push_back(diagnostic);
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(cw_version()) == "1.0.0");
  CHECK(std::string(cw_status_name(CW_OK)) == "ok");
  CHECK(std::string(cw_status_name(CW_ERR_INVALID_ARGUMENT)) == "InvalidArgument");
  CHECK(std::string(cw_status_name(CW_ERR_FORMAT_VERSION)) == "FormatVersionMismatch");
  CHECK(std::string(cw_status_name(static_cast<cw_status>(99))) == "Unknown");
  cw_string_free(nullptr);
  cw_corpus_free(nullptr);
  cw_model_free(nullptr);
  cw_report_free(nullptr);
}

TEST_CASE("ingest reports stats and diagnostics") {
  const std::string a = data_path("cowrie_part_a.json"), b = data_path("cowrie_part_b.json");
  const char* both[] = {a.c_str(), b.c_str()};
  cw_corpus* corpus = nullptr;
  cw_ingest_stats stats{};
  REQUIRE(cw_ingest(both, 2, nullptr, nullptr, &corpus, &stats) == CW_OK);
  CHECK(stats.command_events == 100);
  CHECK(stats.sessions == 7);
  CHECK(stats.errors == 0);
  CHECK(cw_corpus_session_count(corpus) == 7);
  CHECK(cw_corpus_event_count(corpus) == 100);
  cw_corpus_free(corpus);

  const std::string noisy = data_path("cowrie_100.json");
  const char* one[] = {noisy.c_str()};
  std::vector<std::string> diagnostics;
  REQUIRE(cw_ingest(one, 1, collect, &diagnostics, &corpus, &stats) == CW_OK);
  CHECK(stats.lines == 100);
  CHECK(stats.errors == 4);
  CHECK(stats.command_events == 76);
  CHECK(stats.sessions == 5);
  REQUIRE(diagnostics.size() == 4);
  CHECK(diagnostics[0].find(":18:") != std::string::npos);
  cw_corpus_free(corpus);

  const char* missing[] = {"/nonexistent/x.json"};
  CHECK(cw_ingest(missing, 1, nullptr, nullptr, &corpus, nullptr) == CW_ERR_IO);
  CHECK(std::strlen(cw_last_error()) > 0);
  CHECK(cw_ingest(one, 1, nullptr, nullptr, nullptr, nullptr) == CW_ERR_INVALID_ARGUMENT);
}

TEST_CASE("corpus persistence through the C API") {
  cw_corpus* corpus = synthetic(3);
  TempFile file;
  REQUIRE(cw_corpus_save(corpus, file.path().c_str()) == CW_OK);
  cw_corpus* loaded = nullptr;
  REQUIRE(cw_corpus_load(file.path().c_str(), &loaded) == CW_OK);
  CHECK(cw_corpus_session_count(loaded) == cw_corpus_session_count(corpus));
  CHECK(cw_corpus_event_count(loaded) == cw_corpus_event_count(corpus));
  cw_corpus_free(loaded);
  cw_corpus_free(corpus);

  write_all(file.path(), "{\"format\":\"chainwatch-corpus\",\"version\":2}\n");
  CHECK(cw_corpus_load(file.path().c_str(), &loaded) == CW_ERR_FORMAT_VERSION);
  CHECK(cw_corpus_load("/nonexistent/c.ndjson", &loaded) == CW_ERR_IO);
  CHECK(cw_corpus_load(nullptr, &loaded) == CW_ERR_INVALID_ARGUMENT);
}

TEST_CASE("generator spec handling") {
  cw_corpus* corpus = nullptr;
  CHECK(cw_generate("{\"noise\": 2}", 0, 0, &corpus) == CW_ERR_INVALID_SPEC);
  CHECK(cw_generate("not json", 0, 0, &corpus) == CW_ERR_INVALID_SPEC);

  char* spec_text = nullptr;
  REQUIRE(cw_spec_default_json(0, &spec_text) == CW_OK);
  const std::string spec = take(spec_text);
  cw_corpus *a = nullptr, *b = nullptr;
  REQUIRE(cw_generate(spec.c_str(), 1, 77, &a) == CW_OK);
  REQUIRE(cw_generate(spec.c_str(), 1, 77, &b) == CW_OK);
  TempFile fa, fb;
  cw_corpus_save(a, fa.path().c_str());
  cw_corpus_save(b, fb.path().c_str());
  CHECK(chainwatch::testing::read_all(fa.path()) == chainwatch::testing::read_all(fb.path()));
  cw_corpus_free(a);
  cw_corpus_free(b);
}

TEST_CASE("train, predict and persist a model") {
  cw_corpus* corpus = synthetic(1, 0.0);
  cw_model* model = nullptr;
  REQUIRE(cw_model_train(corpus, 3, 11, &model) == CW_OK);
  CHECK(cw_model_k_min(model) == 3);
  CHECK(cw_model_k_max(model) == 11);
  CHECK(cw_model_vocab_size(model) == 20);
  CHECK(cw_model_window_count(model, 3) > 0);
  CHECK(cw_model_window_count(model, 12) == 0);

  const char* query[] = {"cmd_0", "cmd_1"};
  char* out = nullptr;
  REQUIRE(cw_model_predict(model, query, 2, &out) == CW_OK);
  auto doc = json::parse(take(out));
  CHECK(doc["k"] == 3);
  CHECK(doc["predicted_command"] == "cmd_17");
  CHECK(doc["exact"] == true);
  CHECK(doc["distance_edits"] == 0);

  const char* unknown[] = {"never-seen", "cmd_1"};
  REQUIRE(cw_model_predict(model, unknown, 2, &out) == CW_OK);
  doc = json::parse(take(out));
  CHECK(doc["exact"] == false);
  CHECK(doc["distance_edits"] == 1);
  CHECK(doc["matched_commands"][1] == "cmd_1");

  const char* too_long[12] = {};
  for (auto& c : too_long) c = "cmd_0";
  CHECK(cw_model_predict(model, too_long, 12, &out) == CW_ERR_NO_MODEL_FOR_LENGTH);
  CHECK(std::string(cw_last_error()).size() > 0);

  TempFile file;
  REQUIRE(cw_model_save(model, file.path().c_str()) == CW_OK);
  cw_model* loaded = nullptr;
  REQUIRE(cw_model_load(file.path().c_str(), &loaded) == CW_OK);
  CHECK(cw_model_window_count(loaded, 7) == cw_model_window_count(model, 7));
  REQUIRE(cw_model_predict(loaded, query, 2, &out) == CW_OK);
  CHECK(json::parse(take(out))["predicted_command"] == "cmd_17");
  cw_model_free(loaded);
  cw_model_free(model);

  CHECK(cw_model_train(corpus, 5, 3, &model) == CW_ERR_INVALID_ARGUMENT);
  CHECK(cw_model_train(corpus, 30, 31, &model) == CW_ERR_EMPTY_TRAINING_SET);
  CHECK(cw_model_load("/nonexistent/m.json", &model) == CW_ERR_IO);
  cw_corpus_free(corpus);
}

TEST_CASE("evaluation reports") {
  cw_corpus* corpus = synthetic(2);
  cw_eval_options opt;
  cw_eval_options_init(&opt);
  CHECK(opt.k_min == 3);
  CHECK(opt.k_max == 11);
  CHECK(opt.split_ratio == 0.8);
  CHECK(opt.jobs == 1);
  opt.timing_repeats = 1;

  cw_report* report = nullptr;
  REQUIRE(cw_evaluate(corpus, &opt, &report) == CW_OK);
  char* out = nullptr;
  REQUIRE(cw_report_json(report, 0, &out) == CW_OK);
  const std::string serial = take(out);
  CHECK(json::parse(serial)["per_k"].size() == 9);
  REQUIRE(cw_report_csv(report, 1, &out) == CW_OK);
  CHECK(take(out).rfind("k,accuracy_pct,train_time_s", 0) == 0);
  REQUIRE(cw_report_table(report, &out) == CW_OK);
  CHECK(take(out).find("Accuracy") != std::string::npos);
  cw_report_free(report);

  opt.jobs = 8;
  REQUIRE(cw_evaluate(corpus, &opt, &report) == CW_OK);
  REQUIRE(cw_report_json(report, 0, &out) == CW_OK);
  CHECK(take(out) == serial);
  cw_report_free(report);

  opt.split_ratio = 1.5;
  CHECK(cw_evaluate(corpus, &opt, &report) == CW_ERR_INVALID_ARGUMENT);
  cw_corpus_free(corpus);
}

TEST_CASE("top sequences and scaling") {
  cw_corpus* corpus = synthetic(4);
  char* out = nullptr;
  REQUIRE(cw_top_sequences(corpus, 6, 5, &out) == CW_OK);
  const auto top = json::parse(take(out));
  REQUIRE(top.size() == 5);
  CHECK(top[0]["commands"].size() == 6);
  CHECK(top[0]["frequency"] >= top[4]["frequency"]);

  const uint64_t sizes[] = {500, 1000};
  REQUIRE(cw_scaling(corpus, sizes, 2, 3, 0, &out) == CW_OK);
  const auto rows = json::parse(take(out));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1]["size"] == 1000);

  const uint64_t zero[] = {0};
  CHECK(cw_scaling(corpus, zero, 1, 3, 0, &out) == CW_ERR_INSUFFICIENT_DATA);
  cw_corpus_free(corpus);
}
