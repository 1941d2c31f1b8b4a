#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "synthgen/dataset.hpp"
#include "synthgen/lexicons.hpp"
#include "util/rng.hpp"

namespace mecw::tasks {

enum class TaskType { needle, needles, summary, sorted };
inline constexpr std::array<TaskType, 4> kAllTasks{TaskType::needle, TaskType::needles, TaskType::summary,
                                                   TaskType::sorted};

std::string_view to_string(TaskType task);
std::optional<TaskType> parse_task(std::string_view name);

enum class FilterDimension { color, item };

// Needles/Sorted selector. For items `value` is the singular form.
struct Filter {
  FilterDimension dimension = FilterDimension::color;
  std::string value;
  bool operator==(const Filter&) const = default;
};

struct ExpectedAnswer {
  enum class Kind { numeric, string };
  Kind kind = Kind::numeric;
  std::int64_t numeric_value = 0;
  std::string string_value;

  static ExpectedAnswer numeric(std::int64_t v) { return {Kind::numeric, v, {}}; }
  static ExpectedAnswer text(std::string v) { return {Kind::string, 0, std::move(v)}; }
  std::string rendered() const { return kind == Kind::numeric ? std::to_string(numeric_value) : string_value; }
  bool operator==(const ExpectedAnswer&) const = default;
};

struct QuestionInstance {
  TaskType task = TaskType::needle;
  std::optional<std::string> person;  // Needle
  std::optional<Filter> filter;       // Needles, Sorted
  std::string text;
  ExpectedAnswer expected;
  bool operator==(const QuestionInstance&) const = default;
};

enum class FailureReason { unparseable, wrong_value, empty };
std::string_view to_string(FailureReason reason);
std::optional<FailureReason> parse_failure_reason(std::string_view name);

struct GradeResult {
  bool correct = false;
  std::optional<std::string> parsed_answer;
  std::optional<FailureReason> failure_reason;
  bool operator==(const GradeResult&) const = default;
};

using Rows = std::span<const synth::FactRow>;

std::string question_text(TaskType task, const std::optional<std::string>& person,
                          const std::optional<Filter>& filter, const synth::Lexicons& lex);

// Selector drawn from the rows (person for Needle, a present color or item for
// Needles/Sorted with the dimension chosen by a fair coin).
QuestionInstance make_question(TaskType task, Rows rows, const synth::Lexicons& lex, rng::Stream& stream);

std::int64_t oracle_needle(Rows rows, std::string_view person);
std::int64_t oracle_needles(Rows rows, const Filter& filter, const synth::Lexicons& lex);
std::int64_t oracle_summary(Rows rows);
std::string oracle_sorted(Rows rows, const Filter& filter, const synth::Lexicons& lex);

ExpectedAnswer evaluate(TaskType task, Rows rows, const std::optional<std::string>& person,
                        const std::optional<Filter>& filter, const synth::Lexicons& lex);

// Never throws. Takes the first JSON object in `raw` carrying an "answer" key,
// tolerating prose and code fences around it.
GradeResult grade(std::string_view raw, const ExpectedAnswer& expected);

}  // namespace mecw::tasks
