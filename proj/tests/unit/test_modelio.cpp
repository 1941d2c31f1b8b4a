#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "fixture_server.hpp"
#include "helpers.hpp"
#include "modelio/modelio.hpp"
#include "tasks/tasks.hpp"
#include "util/error.hpp"

using namespace mecw;

namespace {

model::ModelEndpoint live_endpoint(const testing::FixtureServer& server, const char* env = "MECW_TEST_KEY") {
  model::ModelEndpoint e;
  e.model_id = "fixture-model";
  e.base_url = server.base_url();
  e.auth_env_var = env;
  e.timeout_seconds = 5;
  return e;
}

const model::RetryPolicy kFastRetry{3, std::chrono::milliseconds(1)};

}  // namespace

TEST_CASE("profile strings parse, default and round-trip") {
  auto p = model::parse_profile("t0=1500,w=100,ph=0.98,pl=0.05");
  CHECK(p.t0 == 1500);
  CHECK(p.w == 100);
  CHECK(p.p_high == 0.98);
  CHECK(p.p_low == 0.05);
  CHECK(model::parse_profile(model::format_profile(p)) == p);
  auto d = model::parse_profile("w=10, t0=20");
  CHECK(d.p_high == 1.0);
  CHECK(d.p_low == 0.0);
  CHECK(p.probability(1500) == doctest::Approx(0.515));
  for (const char* bad : {"", "t0=1", "t0=1,w=0", "t0=1,w=2,ph=0.2,pl=0.3", "t0=1.5,w=2", "t0=1,w=2,x=3", "t0=a,w=1"})
    CHECK_THROWS_AS(model::parse_profile(bad), Error);
}

TEST_CASE("parse_simulation assigns per-task profiles") {
  auto spec = model::parse_simulation({"needles:t0=800,w=50", "summary:t0=1500,w=50"});
  CHECK(spec.for_task(tasks::TaskType::needles).t0 == 800);
  CHECK(spec.for_task(tasks::TaskType::summary).t0 == 1500);
  CHECK(spec.for_task(tasks::TaskType::sorted).t0 == 800);
  auto with_default = model::parse_simulation({"t0=100,w=5", "sorted:t0=200,w=5"});
  CHECK(with_default.for_task(tasks::TaskType::needle).t0 == 100);
  CHECK(with_default.for_task(tasks::TaskType::sorted).t0 == 200);
  CHECK_THROWS_AS(model::parse_simulation({"t0=1,w=1", "t0=2,w=1"}), Error);
  CHECK_THROWS_AS(model::parse_simulation({"bogus:t0=1,w=1"}), Error);
  CHECK_THROWS_AS(model::parse_simulation({}), Error);
}

TEST_CASE("token counting prefers the provider count") {
  CHECK(model::count_tokens("abcdefgh", std::nullopt).value == 2);
  CHECK(model::count_tokens("abcdefghi", std::nullopt).value == 3);
  CHECK(model::count_tokens("\xc3\xa9\xc3\xa9\xc3\xa9\xc3\xa9", std::nullopt).value == 1);
  auto r = model::count_tokens("abc", 500);
  CHECK(r.value == 500);
  CHECK(r.source == model::TokenSource::reported);
}

TEST_CASE("endpoint config parsing") {
  auto eps = model::parse_endpoint_config(R"({"endpoints": [
    {"model_id": "m1", "base_url": "https://api.example.test/v1", "auth_env_var": "EXAMPLE_KEY",
     "request_shape": "chat_completions_v1", "max_concurrency": 2},
    {"model_id": "s1", "request_shape": "simulated", "profile": "t0=100,w=10",
     "task_profiles": {"sorted": "t0=50,w=10"}}]})");
  REQUIRE(eps.size() == 2);
  CHECK(eps[0].max_concurrency == 2);
  CHECK_FALSE(eps[0].max_output_tokens);
  CHECK(eps[1].simulated());
  CHECK(eps[1].simulation->for_task(tasks::TaskType::sorted).t0 == 50);
  CHECK(model::endpoint_from_json(model::to_json(eps[0])) == eps[0]);
  CHECK(model::endpoint_from_json(model::to_json(eps[1])) == eps[1]);
  CHECK_THROWS_AS(model::parse_endpoint_config(R"({"endpoints": [{"model_id": "x"}]})"), Error);
  CHECK_THROWS_AS(model::parse_endpoint_config("not json"), Error);
  // A profile on a live endpoint would be silently ignored.
  CHECK_THROWS_AS(model::parse_endpoint_config(R"({"endpoints": [{"model_id": "x", "base_url": "https://h/v1",
      "auth_env_var": "K", "profile": {"t0": 10, "w": 1}}]})"), Error);
}

TEST_CASE("fixture replay: request shape and response parsing") {
  testing::FixtureServer server;
  server.set_fallback({200, testing::FixtureServer::read(testing::fixture_file("chat_completion_ok.json"))});
  setenv("MECW_TEST_KEY", "sk-test-123", 1);
  auto r = model::complete(live_endpoint(server), "system text", "user text");
  REQUIRE(r.transport_status == model::TransportStatus::ok);
  CHECK(r.text == "```json\n{\"answer\": 12}\n```");
  CHECK(r.prompt_tokens_reported == 187);
  CHECK(r.completion_tokens_reported == 9);
  CHECK(tasks::grade(r.text, tasks::ExpectedAnswer::numeric(12)).correct);

  auto sent = nlohmann::json::parse(server.bodies().at(0));
  CHECK(sent["model"] == "fixture-model");
  CHECK(sent["messages"][0]["role"] == "system");
  CHECK(sent["messages"][0]["content"] == "system text");
  CHECK(sent["messages"][1]["content"] == "user text");
  CHECK_FALSE(sent.contains("max_tokens"));
  CHECK_FALSE(sent.contains("temperature"));
  CHECK(server.auth_headers().at(0) == "Bearer sk-test-123");
}

TEST_CASE("fixture replay: retryable failures are retried, fatal ones are not") {
  testing::FixtureServer server;
  setenv("MECW_TEST_KEY", "k", 1);
  auto ok = testing::FixtureServer::read(testing::fixture_file("chat_completion_ok.json"));
  server.push({429, R"({"error": {"message": "slow down"}})"});
  server.push({503, "upstream"});
  server.push({200, ok});
  auto r = model::complete_with_retry(live_endpoint(server), "s", "u", nullptr, kFastRetry);
  CHECK(r.transport_status == model::TransportStatus::ok);
  CHECK(r.attempts == 3);

  server.push({400, R"({"error": {"message": "context length exceeded"}})"});
  auto f = model::complete_with_retry(live_endpoint(server), "s", "u", nullptr, kFastRetry);
  CHECK(f.transport_status == model::TransportStatus::fatal_failure);
  CHECK(f.attempts == 1);
  CHECK(f.error.find("context length exceeded") != std::string::npos);

  server.set_fallback({500, "down"});
  auto g = model::complete_with_retry(live_endpoint(server), "s", "u", nullptr, kFastRetry);
  CHECK(g.transport_status == model::TransportStatus::retryable_failure);
  CHECK(g.attempts == 4);
}

TEST_CASE("a missing credential fails before any request") {
  testing::FixtureServer server;
  unsetenv("MECW_TEST_MISSING");
  auto r = model::complete(live_endpoint(server, "MECW_TEST_MISSING"), "s", "u");
  CHECK(r.transport_status == model::TransportStatus::fatal_failure);
  CHECK(r.error.find("MECW_TEST_MISSING") != std::string::npos);
  CHECK(server.bodies().empty());
  CHECK(model::missing_credentials({live_endpoint(server, "MECW_TEST_MISSING")}) ==
        std::vector<std::string>{"MECW_TEST_MISSING"});
}

TEST_CASE("unreachable host is a retryable transport failure") {
  model::ModelEndpoint e;
  e.model_id = "m";
  e.base_url = "http://127.0.0.1:1/v1";
  e.auth_env_var = "MECW_TEST_KEY";
  e.timeout_seconds = 2;
  setenv("MECW_TEST_KEY", "k", 1);
  auto r = model::complete(e, "s", "u");
  CHECK(r.transport_status == model::TransportStatus::retryable_failure);
}

TEST_CASE("simulated accuracy at the breakpoint matches the profile midpoint") {
  auto profile = model::parse_profile("t0=1500,w=100,ph=0.98,pl=0.05");
  tasks::QuestionInstance q;
  q.task = tasks::TaskType::summary;
  q.expected = tasks::ExpectedAnswer::numeric(57);
  rng::Stream stream(2024);
  const int n = 20000;
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    auto r = model::simulate_complete(profile, q, 1500, stream);
    auto g = tasks::grade(r.text, q.expected);
    CHECK(g.failure_reason != tasks::FailureReason::unparseable);
    correct += g.correct;
  }
  CHECK(std::fabs(static_cast<double>(correct) / n - 0.515) <= 0.02);
}

TEST_CASE("simulated wrong answers are well-formed and wrong") {
  auto profile = model::parse_profile("t0=1,w=1,ph=0,pl=0");
  rng::Stream stream(3);
  tasks::QuestionInstance q;
  q.task = tasks::TaskType::sorted;
  for (const char* expected : {"", "7", "1912207"}) {
    q.expected = tasks::ExpectedAnswer::text(expected);
    for (int i = 0; i < 200; ++i) {
      auto g = tasks::grade(model::simulate_complete(profile, q, 10, stream).text, q.expected);
      CHECK_FALSE(g.correct);
      CHECK(g.failure_reason == tasks::FailureReason::wrong_value);
    }
  }
  q.task = tasks::TaskType::needle;
  q.expected = tasks::ExpectedAnswer::numeric(1);
  for (int i = 0; i < 200; ++i)
    CHECK(tasks::grade(model::simulate_complete(profile, q, 10, stream).text, q.expected).failure_reason ==
          tasks::FailureReason::wrong_value);
}
