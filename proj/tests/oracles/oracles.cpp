#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace oracle {

std::map<std::string, std::string> read_item_forms(const std::string& lexicon_path) {
  std::ifstream in(lexicon_path);
  if (!in) throw std::runtime_error("cannot open " + lexicon_path);
  auto doc = nlohmann::json::parse(in);
  std::map<std::string, std::string> forms;
  for (const auto& item : doc.at("items")) forms[item.at("singular")] = item.at("plural");
  return forms;
}

std::optional<Sentence> parse_sentence(const std::string& line) {
  static const std::regex re(R"(^(\S+) (\S+) has ([0-9]+) (\S+) (\S+)\.$)");
  std::smatch m;
  if (!std::regex_match(line, m, re)) return std::nullopt;
  return Sentence{m[1], m[2], std::stoi(m[3]), m[4], m[5]};
}

namespace {

std::string singular_of(const std::string& noun, const std::map<std::string, std::string>& forms) {
  for (const auto& [s, p] : forms)
    if (noun == s || noun == p) return s;
  throw std::runtime_error("unknown noun " + noun);
}

}  // namespace

std::string answer_from_prompt(const std::string& prompt, const std::map<std::string, std::string>& forms) {
  std::vector<Sentence> rows;
  std::istringstream in(prompt);
  std::string line, question;
  while (std::getline(in, line)) {
    if (auto s = parse_sentence(line)) rows.push_back(*s);
    if (line.rfind("Question: ", 0) == 0) question = line.substr(10);
  }
  if (question.empty()) throw std::runtime_error("prompt has no question line");

  std::smatch m;
  static const std::regex needle(R"(^How many objects does (\S+) (\S+) have\?$)");
  static const std::regex by_color(R"(^How many (\S+) objects are there\?$)");
  static const std::regex total(R"(^How many objects are there total\?$)");
  static const std::regex by_item(R"(^How many (\S+) are there\?$)");
  static const std::regex sorted(R"(^Find all people with (\S+?)( objects)?\. Sort them by first and last name\. .*$)");

  if (std::regex_match(question, m, needle)) {
    long hits = 0, value = 0;
    for (const auto& r : rows)
      if (r.first == m[1] && r.last == m[2]) ++hits, value = r.count;
    if (hits != 1) throw std::runtime_error("needle person appears " + std::to_string(hits) + " times");
    return std::to_string(value);
  }
  if (std::regex_match(question, m, total)) {
    long sum = 0;
    for (const auto& r : rows) sum += r.count;
    return std::to_string(sum);
  }
  if (std::regex_match(question, m, by_color)) {
    long sum = 0;
    for (const auto& r : rows)
      if (r.color == m[1]) sum += r.count;
    return std::to_string(sum);
  }
  if (std::regex_match(question, m, by_item)) {
    std::string item = singular_of(m[1], forms);
    long sum = 0;
    for (const auto& r : rows)
      if (singular_of(r.noun, forms) == item) sum += r.count;
    return std::to_string(sum);
  }
  if (std::regex_match(question, m, sorted)) {
    bool color = m[2].matched;
    std::string key = color ? std::string(m[1]) : singular_of(m[1], forms);
    std::vector<Sentence> hits;
    for (const auto& r : rows)
      if (color ? r.color == key : singular_of(r.noun, forms) == key) hits.push_back(r);
    std::sort(hits.begin(), hits.end(),
              [](const Sentence& a, const Sentence& b) { return std::tie(a.first, a.last) < std::tie(b.first, b.last); });
    std::string out;
    for (const auto& r : hits) out += std::to_string(r.count);
    return out;
  }
  throw std::runtime_error("unrecognized question: " + question);
}

long double binomial_two_sided_direct(int n, int k, long double p0) {
  std::vector<long double> pmf(n + 1);
  for (int i = 0; i <= n; ++i) {
    // C(n, i) by the multiplicative formula.
    long double c = 1;
    for (int j = 1; j <= i; ++j) c = c * (n - i + j) / j;
    pmf[i] = c * std::pow(p0, static_cast<long double>(i)) * std::pow(1 - p0, static_cast<long double>(n - i));
  }
  long double limit = pmf[k] * (1 + 1e-7L), total = 0;
  for (int i = 0; i <= n; ++i)
    if (pmf[i] <= limit) total += pmf[i];
  return std::min<long double>(total, 1.0L);
}

double t_two_sided_integrated(double t, double df) {
  double norm = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto density = [&](double x) { return norm * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const int intervals = 200000;
  double a = 0, b = std::fabs(t), h = (b - a) / intervals, s = density(a) + density(b);
  for (int i = 1; i < intervals; ++i) s += density(a + i * h) * (i % 2 ? 4 : 2);
  double central = s * h / 3;
  return 1 - 2 * central;
}

}  // namespace oracle
