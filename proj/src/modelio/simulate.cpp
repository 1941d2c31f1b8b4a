#include <json.hpp>

#include "modelio/modelio.hpp"

namespace mecw::model {

namespace {

std::string wrong_answer(const tasks::ExpectedAnswer& expected, rng::Stream& stream) {
  if (expected.kind == tasks::ExpectedAnswer::Kind::numeric) {
    // Nonzero offset in [-5, 5].
    std::int64_t offset = stream.between(-5, 4);
    if (offset >= 0) ++offset;
    return std::to_string(expected.numeric_value + offset);
  }
  std::string s = expected.string_value;
  if (s.empty()) return "0";
  auto pos = static_cast<std::size_t>(stream.below(s.size()));
  int old_digit = s[pos] - '0';
  int replacement = static_cast<int>(stream.below(9));
  if (replacement >= old_digit) ++replacement;
  s[pos] = static_cast<char>('0' + replacement);
  return s;
}

}  // namespace

CompletionResult simulate_complete(const DegradationProfile& profile, const tasks::QuestionInstance& question,
                                   std::int64_t prompt_tokens, rng::Stream& stream) {
  const auto& expected = question.expected;
  bool right = stream.unit() < profile.probability(static_cast<double>(prompt_tokens));
  std::string value = right ? expected.rendered() : wrong_answer(expected, stream);

  nlohmann::json body;
  if (expected.kind == tasks::ExpectedAnswer::Kind::numeric)
    body["answer"] = std::stoll(value);
  else
    body["answer"] = value;

  CompletionResult out;
  out.text = body.dump();
  out.transport_status = TransportStatus::ok;
  return out;
}

}  // namespace mecw::model
