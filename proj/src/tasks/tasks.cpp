#include "tasks/tasks.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "util/error.hpp"

namespace mecw::tasks {

namespace {

constexpr std::string_view kSortTail =
    " Sort them by first and last name. Concatenate the number of objects they have into one long string value in "
    "the order they were sorted.";

bool matches(const synth::FactRow& row, const Filter& f) {
  return f.dimension == FilterDimension::color ? row.color == f.value : row.item == f.value;
}

void check_filter(const Filter& f, const synth::Lexicons& lex) {
  bool ok = f.dimension == FilterDimension::color ? lex.has_color(f.value) : lex.find_item(f.value) != nullptr;
  if (!ok) fail(ErrorCode::invalid_argument, "invalid filter value '" + f.value + "'");
}

}  // namespace

std::string_view to_string(TaskType task) {
  switch (task) {
    case TaskType::needle: return "needle";
    case TaskType::needles: return "needles";
    case TaskType::summary: return "summary";
    case TaskType::sorted: return "sorted";
  }
  return "?";
}

std::optional<TaskType> parse_task(std::string_view name) {
  for (auto t : kAllTasks)
    if (to_string(t) == name) return t;
  return std::nullopt;
}

std::string_view to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::unparseable: return "unparseable";
    case FailureReason::wrong_value: return "wrong_value";
    case FailureReason::empty: return "empty";
  }
  return "?";
}

std::optional<FailureReason> parse_failure_reason(std::string_view name) {
  for (auto r : {FailureReason::unparseable, FailureReason::wrong_value, FailureReason::empty})
    if (to_string(r) == name) return r;
  return std::nullopt;
}

std::string question_text(TaskType task, const std::optional<std::string>& person,
                          const std::optional<Filter>& filter, const synth::Lexicons& lex) {
  auto filter_phrase = [&]() -> std::string {
    if (!filter) fail(ErrorCode::invalid_argument, "question needs a filter");
    check_filter(*filter, lex);
    if (filter->dimension == FilterDimension::color) return filter->value + " objects";
    return lex.find_item(filter->value)->plural;
  };
  switch (task) {
    case TaskType::needle:
      if (!person) fail(ErrorCode::invalid_argument, "needle question needs a person");
      return "How many objects does " + *person + " have?";
    case TaskType::needles:
      return "How many " + filter_phrase() + " are there?";
    case TaskType::summary:
      return "How many objects are there total?";
    case TaskType::sorted:
      return "Find all people with " + filter_phrase() + "." + std::string(kSortTail);
  }
  fail(ErrorCode::internal, "unknown task");
}

std::int64_t oracle_needle(Rows rows, std::string_view person) {
  const synth::FactRow* hit = nullptr;
  for (const auto& row : rows) {
    if (row.person_name != person) continue;
    if (hit) fail(ErrorCode::oracle_integrity, "oracle_needle: multiple rows for '" + std::string(person) + "'");
    hit = &row;
  }
  if (!hit) fail(ErrorCode::oracle_integrity, "oracle_needle: no row for '" + std::string(person) + "'");
  return hit->count;
}

std::int64_t oracle_needles(Rows rows, const Filter& filter, const synth::Lexicons& lex) {
  check_filter(filter, lex);
  std::int64_t total = 0;
  for (const auto& row : rows)
    if (matches(row, filter)) total += row.count;
  return total;
}

std::int64_t oracle_summary(Rows rows) {
  std::int64_t total = 0;
  for (const auto& row : rows) total += row.count;
  return total;
}

std::string oracle_sorted(Rows rows, const Filter& filter, const synth::Lexicons& lex) {
  check_filter(filter, lex);
  std::vector<const synth::FactRow*> hits;
  for (const auto& row : rows)
    if (matches(row, filter)) hits.push_back(&row);
  std::sort(hits.begin(), hits.end(), [](const synth::FactRow* a, const synth::FactRow* b) {
    // std::string_view comparison is char_traits<char>::compare, i.e. byte order.
    return std::pair{a->first_name(), a->last_name()} < std::pair{b->first_name(), b->last_name()};
  });
  std::string out;
  for (const auto* row : hits) out += std::to_string(row->count);
  return out;
}

ExpectedAnswer evaluate(TaskType task, Rows rows, const std::optional<std::string>& person,
                        const std::optional<Filter>& filter, const synth::Lexicons& lex) {
  switch (task) {
    case TaskType::needle:
      if (!person) fail(ErrorCode::invalid_argument, "needle question needs a person");
      return ExpectedAnswer::numeric(oracle_needle(rows, *person));
    case TaskType::needles:
      if (!filter) fail(ErrorCode::invalid_argument, "needles question needs a filter");
      return ExpectedAnswer::numeric(oracle_needles(rows, *filter, lex));
    case TaskType::summary:
      return ExpectedAnswer::numeric(oracle_summary(rows));
    case TaskType::sorted:
      if (!filter) fail(ErrorCode::invalid_argument, "sorted question needs a filter");
      return ExpectedAnswer::text(oracle_sorted(rows, *filter, lex));
  }
  fail(ErrorCode::internal, "unknown task");
}

QuestionInstance make_question(TaskType task, Rows rows, const synth::Lexicons& lex, rng::Stream& stream) {
  if (rows.empty()) fail(ErrorCode::invalid_argument, "make_question: no rows");
  QuestionInstance q;
  q.task = task;
  if (task == TaskType::needle) {
    q.person = rows[stream.below(rows.size())].person_name;
  } else if (task == TaskType::needles || task == TaskType::sorted) {
    Filter f;
    f.dimension = stream.coin() ? FilterDimension::item : FilterDimension::color;
    std::set<std::string_view> present;
    for (const auto& row : rows) present.insert(f.dimension == FilterDimension::color ? row.color : row.item);
    auto it = present.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(stream.below(present.size())));
    f.value = std::string(*it);
    q.filter = std::move(f);
  }
  q.text = question_text(task, q.person, q.filter, lex);
  q.expected = evaluate(task, rows, q.person, q.filter, lex);
  return q;
}

}  // namespace mecw::tasks
