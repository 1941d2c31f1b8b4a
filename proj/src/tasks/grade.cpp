#include <cmath>
#include <limits>

#include <json.hpp>

#include "tasks/tasks.hpp"
#include "util/text.hpp"

namespace mecw::tasks {

namespace {

using nlohmann::json;

// Index one past the brace closing the object opened at `open`, honoring
// JSON string literals; npos when unbalanced.
std::size_t match_object(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

std::optional<json> find_answer(std::string_view raw) {
  for (std::size_t open = raw.find('{'); open != std::string_view::npos; open = raw.find('{', open + 1)) {
    std::size_t end = match_object(raw, open);
    if (end == std::string_view::npos) continue;
    json doc = json::parse(raw.substr(open, end - open), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) continue;
    auto it = doc.find("answer");
    if (it != doc.end()) return *it;
  }
  return std::nullopt;
}

// Canonical text of an answer value, or nullopt when it has no scalar reading.
std::optional<std::string> answer_text(const json& v) {
  if (v.is_string()) return std::string(text::trim(v.get_ref<const std::string&>()));
  if (v.is_number_integer()) return v.is_number_unsigned() ? std::to_string(v.get<std::uint64_t>())
                                                           : std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9.0e15)
      return std::to_string(static_cast<std::int64_t>(d));
  }
  return std::nullopt;
}

std::optional<std::int64_t> as_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool negative = s.front() == '-';
  if (negative) s.remove_prefix(1);
  if (s.empty() || s.size() > 18) return std::nullopt;
  std::int64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return negative ? -v : v;
}

}  // namespace

GradeResult grade(std::string_view raw, const ExpectedAnswer& expected) {
  GradeResult result;
  if (text::trim(raw).empty()) {
    result.failure_reason = FailureReason::empty;
    return result;
  }
  auto value = find_answer(raw);
  auto candidate = value ? answer_text(*value) : std::nullopt;
  if (!candidate) {
    result.failure_reason = FailureReason::unparseable;
    return result;
  }
  if (expected.kind == ExpectedAnswer::Kind::numeric) {
    auto number = as_integer(*candidate);
    if (!number) {
      result.failure_reason = FailureReason::unparseable;
      return result;
    }
    result.parsed_answer = std::to_string(*number);
    result.correct = *number == expected.numeric_value;
  } else {
    result.parsed_answer = *candidate;
    result.correct = *candidate == expected.string_value;
  }
  if (!result.correct) result.failure_reason = FailureReason::wrong_value;
  return result;
}

}  // namespace mecw::tasks
