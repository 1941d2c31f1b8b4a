#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sweep/prompt.hpp"
#include "synthgen/dataset.hpp"
#include "tasks/tasks.hpp"
#include "util/error.hpp"
#include "util/rng.hpp"

using namespace mecw;
using tasks::TaskType;

namespace {

std::vector<synth::FactRow> rows_of(const std::vector<std::tuple<std::string, int, std::string, std::string>>& spec) {
  const auto& lex = synth::default_lexicons();
  std::vector<synth::FactRow> rows;
  for (const auto& [name, count, color, item] : spec)
    rows.push_back({name, count, color, item, synth::render_row(name, count, color, item, lex)});
  return rows;
}

}  // namespace

TEST_CASE("question templates match the four task wordings") {
  const auto& lex = synth::default_lexicons();
  tasks::Filter red{tasks::FilterDimension::color, "red"};
  tasks::Filter box{tasks::FilterDimension::item, "box"};
  CHECK(tasks::question_text(TaskType::needle, "Ann Bell", std::nullopt, lex) == "How many objects does Ann Bell have?");
  CHECK(tasks::question_text(TaskType::needles, std::nullopt, red, lex) == "How many red objects are there?");
  CHECK(tasks::question_text(TaskType::needles, std::nullopt, box, lex) == "How many boxes are there?");
  CHECK(tasks::question_text(TaskType::summary, std::nullopt, std::nullopt, lex) == "How many objects are there total?");
  CHECK(tasks::question_text(TaskType::sorted, std::nullopt, red, lex) ==
        "Find all people with red objects. Sort them by first and last name. Concatenate the number of objects they "
        "have into one long string value in the order they were sorted.");
}

TEST_CASE("oracles on a hand-checked context") {
  const auto& lex = synth::default_lexicons();
  auto rows = rows_of({{"Zoe Adams", 4, "red", "kite"},
                       {"Ann Bell", 12, "blue", "kite"},
                       {"Ann Adams", 1, "red", "box"},
                       {"Bob Holmes", 7, "red", "kite"}});
  CHECK(tasks::oracle_needle(rows, "Ann Bell") == 12);
  CHECK(tasks::oracle_summary(rows) == 24);
  CHECK(tasks::oracle_needles(rows, {tasks::FilterDimension::color, "red"}, lex) == 12);
  CHECK(tasks::oracle_needles(rows, {tasks::FilterDimension::item, "kite"}, lex) == 23);
  // Ann Adams < Bob Holmes < Zoe Adams
  CHECK(tasks::oracle_sorted(rows, {tasks::FilterDimension::color, "red"}, lex) == "174");
  CHECK(tasks::oracle_sorted(rows, {tasks::FilterDimension::item, "kite"}, lex) == "12" "7" "4");
  CHECK(tasks::oracle_sorted(rows, {tasks::FilterDimension::color, "pink"}, lex).empty());
}

TEST_CASE("oracle_needle refuses a context without exactly one match") {
  auto rows = rows_of({{"Ann Bell", 2, "red", "kite"}});
  try {
    tasks::oracle_needle(rows, "Bob Holmes");
    FAIL("expected oracle integrity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::oracle_integrity);
  }
}

TEST_CASE("generated questions agree with a brute-force re-parse of the prompt") {
  const auto& lex = synth::default_lexicons();
  auto forms = oracle::read_item_forms(testing::data_file("default_lexicon.json"));
  auto ds = synth::generate_dataset(400, 8, lex);
  const auto& tmpl = sweep::default_prompt_template();
  for (std::uint64_t ctx = 0; ctx < 150; ++ctx) {
    rng::Stream stream(42, "test/context", {ctx});
    auto n = static_cast<std::size_t>(stream.between(1, 50));
    std::vector<synth::FactRow> rows;
    for (auto i : stream.sample_without_replacement(ds.rows.size(), n)) rows.push_back(ds.rows[i]);
    for (auto task : tasks::kAllTasks) {
      auto q = tasks::make_question(task, rows, lex, stream);
      std::string prompt = sweep::build_prompt(rows, q, tmpl, stream);
      REQUIRE(oracle::answer_from_prompt(prompt, forms) == q.expected.rendered());
      if (task == TaskType::needle) CHECK(prompt.find(*q.person + " has ") != std::string::npos);
    }
  }
}

TEST_CASE("make_question only selects values present in the context") {
  const auto& lex = synth::default_lexicons();
  auto rows = rows_of({{"Ann Bell", 2, "red", "kite"}});
  rng::Stream stream(1);
  for (int i = 0; i < 50; ++i) {
    auto q = tasks::make_question(TaskType::sorted, rows, lex, stream);
    REQUIRE(q.filter);
    CHECK((q.filter->value == "red" || q.filter->value == "kite"));
    CHECK(q.expected.rendered() == "2");
  }
}

TEST_CASE("grading corpus") {
  std::ifstream in(testing::fixture_file("grading_corpus.json"));
  auto corpus = nlohmann::json::parse(in);
  REQUIRE(corpus.size() >= 20);
  for (const auto& c : corpus) {
    std::string raw;
    if (c.contains("raw_hex")) {
      std::istringstream hex(c["raw_hex"].get<std::string>());
      unsigned byte;
      while (hex >> std::hex >> byte) raw.push_back(static_cast<char>(byte));
    } else {
      raw = c["raw"];
    }
    auto expected = c["expected"].is_string() ? tasks::ExpectedAnswer::text(c["expected"])
                                              : tasks::ExpectedAnswer::numeric(c["expected"].get<std::int64_t>());
    CAPTURE(c["shape"].get<std::string>());
    auto g = tasks::grade(raw, expected);
    CHECK(g.correct == c["correct"].get<bool>());
    std::string reason = g.failure_reason ? std::string(tasks::to_string(*g.failure_reason)) : "";
    CHECK(reason == c["reason"].get<std::string>());
  }
}

TEST_CASE("grader never throws on arbitrary bytes") {
  rng::Stream stream(7);
  const std::string alphabet = "{}[]\":,0123456789 answer\\\n\x80\xff";
  for (int i = 0; i < 2000; ++i) {
    std::string raw;
    auto len = stream.below(40);
    for (std::uint64_t j = 0; j < len; ++j) raw.push_back(alphabet[stream.below(alphabet.size())]);
    CHECK_NOTHROW(tasks::grade(raw, tasks::ExpectedAnswer::numeric(1)));
    CHECK_NOTHROW(tasks::grade(raw, tasks::ExpectedAnswer::text("1")));
  }
}
