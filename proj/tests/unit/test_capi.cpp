#include <doctest.h>

#include <cstdlib>
#include <string>

#include "helpers.hpp"
#include "mecw/mecw.h"
#include "store/store.hpp"
#include "util/error.hpp"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  mecw_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("C API: status codes mirror the library error codes") {
  CHECK(MECW_E_CREDENTIALS == static_cast<int>(mecw::ErrorCode::credentials));
  CHECK(MECW_E_NOT_ANALYZED == static_cast<int>(mecw::ErrorCode::not_analyzed));
  CHECK(MECW_E_INTERNAL == static_cast<int>(mecw::ErrorCode::internal));
  CHECK(std::string(mecw_status_name(MECW_E_PARSE)) == "parse");
  CHECK(std::string(mecw_version()) == "1.0.0");
}

TEST_CASE("C API: scalar helpers") {
  double v = 0;
  REQUIRE(mecw_cascade_success(0.7, 3, &v) == MECW_OK);
  CHECK(v == doctest::Approx(0.343).epsilon(1e-15));
  CHECK(mecw_cascade_success(2.0, 3, &v) == MECW_E_INVALID_ARGUMENT);
  CHECK(std::string(mecw_last_error()).find("[0, 1]") != std::string::npos);

  char* s = nullptr;
  REQUIRE(mecw_format_log10_p(-243.39254, &s) == MECW_OK);
  CHECK(take(s) == "4.05E-244");

  int correct = -1;
  REQUIRE(mecw_grade("```json\n{\"answer\": \"12\"}\n```", "12", &correct, &s) == MECW_OK);
  CHECK(correct == 1);
  CHECK(take(s).empty());
  REQUIRE(mecw_grade("nothing", "\"1912\"", &correct, &s) == MECW_OK);
  CHECK(correct == 0);
  CHECK(take(s) == "unparseable");
  CHECK(mecw_grade("x", "[1]", &correct, nullptr) == MECW_E_INVALID_ARGUMENT);

  CHECK(mecw_count_tokens("abcdefgh", -1) == 2);
  CHECK(mecw_count_tokens("abcdefgh", 11) == 11);

  std::int64_t tokens[] = {100, 200, 300, 400};
  int outcome[] = {1, 1, 0, 0};
  double r = 0, lp = 0;
  REQUIRE(mecw_point_biserial(tokens, outcome, 4, &r, &lp) == MECW_OK);
  CHECK(r == doctest::Approx(-0.894).epsilon(0.001));
  CHECK(mecw_point_biserial(tokens, outcome, 2, &r, &lp) == MECW_E_DEGENERATE_INPUT);

  REQUIRE(mecw_profile_normalize("sorted: t0=10, w=2", &s) == MECW_OK);
  CHECK(take(s) == "sorted:t0=10,w=2,ph=1,pl=0");
  CHECK(mecw_profile_normalize("t0=x", &s) == MECW_E_PARSE);
}

TEST_CASE("C API: lexicons, datasets and rows") {
  mecw_lexicons* lex = nullptr;
  REQUIRE(mecw_lexicons_default(&lex) == MECW_OK);
  mecw_dataset* ds = nullptr;
  REQUIRE(mecw_dataset_generate(lex, 25, 9, &ds) == MECW_OK);
  CHECK(mecw_dataset_size(ds) == 25);
  char* s = nullptr;
  REQUIRE(mecw_dataset_row(ds, 0, &s) == MECW_OK);
  std::string row = take(s);
  REQUIRE(mecw_parse_row(lex, row.c_str(), &s) == MECW_OK);
  auto fields = nlohmann::json::parse(take(s));
  REQUIRE(mecw_render_row(lex, fields["person_name"].get<std::string>().c_str(), fields["count"],
                          fields["color"].get<std::string>().c_str(), fields["item"].get<std::string>().c_str(),
                          &s) == MECW_OK);
  CHECK(take(s) == row);
  CHECK(mecw_dataset_row(ds, 25, &s) == MECW_E_INVALID_ARGUMENT);
  CHECK(mecw_parse_row(lex, "nonsense", &s) == MECW_E_PARSE);
  CHECK(mecw_dataset_generate(lex, 100000000, 1, &ds) == MECW_E_CAPACITY);
  mecw_dataset_free(ds);
  mecw_lexicons_free(lex);
  CHECK(mecw_lexicons_load("/nonexistent/lexicon.json", &lex) != MECW_OK);
}

TEST_CASE("C API: simulate, analyze, estimate and report a small run") {
  testing::TempDir dir;
  mecw_plan* plan = nullptr;
  REQUIRE(mecw_plan_load("default", &plan) == MECW_OK);
  const char* profiles[] = {"t0=1500,w=100,ph=0.98,pl=0.05"};
  REQUIRE(mecw_plan_add_simulated(plan, "sim", profiles, 1) == MECW_OK);
  CHECK(mecw_plan_add_simulated(plan, "sim", profiles, 1) == MECW_E_INVALID_ARGUMENT);
  mecw_sweep_options opts;
  mecw_sweep_options_default(&opts);
  opts.sync_each_record = 0;
  opts.stop_after_trials = 100;
  char* run = nullptr;
  char* outcome = nullptr;
  REQUIRE(mecw_sweep_run(plan, dir.str().c_str(), nullptr, &opts, &run, &outcome) == MECW_OK);
  std::string run_id = take(run);
  CHECK(nlohmann::json::parse(take(outcome))["interrupted"] == true);

  char* text = nullptr;
  CHECK(mecw_report(dir.str().c_str(), run_id.c_str(), nullptr, &text) == MECW_E_NOT_ANALYZED);
  opts.stop_after_trials = 0;
  REQUIRE(mecw_sweep_resume(dir.str().c_str(), run_id.c_str(), &opts, &outcome) == MECW_OK);
  CHECK(nlohmann::json::parse(take(outcome))["trials_committed"] == 1000);

  mecw_analysis_config cfg;
  mecw_analysis_config_default(&cfg);
  CHECK(cfg.bucket_width == 100);
  CHECK(cfg.needle_bucket_width == 5000);
  REQUIRE(mecw_analyze(dir.str().c_str(), run_id.c_str(), &cfg, &text) == MECW_OK);
  CHECK(take(text).find("summary") != std::string::npos);
  cfg.method = MECW_METHOD_CHANGEPOINT_BERNOULLI;
  REQUIRE(mecw_estimate(dir.str().c_str(), run_id.c_str(), &cfg, &text) == MECW_OK);
  CHECK(take(text).find("method=changepoint_bernoulli") != std::string::npos);
  REQUIRE(mecw_report(dir.str().c_str(), run_id.c_str(), "summary,sorted", &text) == MECW_OK);
  CHECK(take(text).find("rankings/summary.tsv") != std::string::npos);
  CHECK(mecw_report(dir.str().c_str(), run_id.c_str(), "bogus", &text) == MECW_E_INVALID_ARGUMENT);
  cfg.p0 = 1.5;
  CHECK(mecw_analyze(dir.str().c_str(), run_id.c_str(), &cfg, &text) == MECW_E_INVALID_ARGUMENT);
  mecw_plan_free(plan);
}

TEST_CASE("C API: sweep refuses to start without credentials") {
  testing::TempDir dir;
  auto config = dir.path() / "endpoints.json";
  mecw::store::write_file_atomic(config, R"({"endpoints": [{"model_id": "m", "base_url": "https://api.example.test/v1",
    "auth_env_var": "MECW_CAPI_ABSENT", "request_shape": "chat_completions_v1"}]})");
  unsetenv("MECW_CAPI_ABSENT");
  mecw_plan* plan = nullptr;
  REQUIRE(mecw_plan_load("default", &plan) == MECW_OK);
  REQUIRE(mecw_plan_use_endpoint_config(plan, config.c_str()) == MECW_OK);
  char* missing = nullptr;
  REQUIRE(mecw_plan_missing_credentials(plan, &missing) == MECW_OK);
  CHECK(take(missing) == "MECW_CAPI_ABSENT");
  char* run = nullptr;
  CHECK(mecw_sweep_run(plan, (dir.path() / "runs").c_str(), nullptr, nullptr, &run, nullptr) == MECW_E_CREDENTIALS);
  CHECK_FALSE(std::filesystem::exists(dir.path() / "runs"));
  mecw_plan_free(plan);
}
