#include "synthgen/dataset.hpp"

#include "util/rng.hpp"

namespace mecw::synth {

std::string_view FactRow::first_name() const {
  std::string_view name = person_name;
  return name.substr(0, name.find(' '));
}

std::string_view FactRow::last_name() const {
  std::string_view name = person_name;
  auto space = name.find(' ');
  return space == std::string_view::npos ? std::string_view{} : name.substr(space + 1);
}

std::string render_row(std::string_view person_name, int count, std::string_view color, std::string_view item,
                       const Lexicons& lex) {
  if (count < kMinCount || count > kMaxCount)
    fail(ErrorCode::invalid_argument, "render_row: count " + std::to_string(count) + " outside [1, 20]");
  auto space = person_name.find(' ');
  if (space == 0 || space == std::string_view::npos || space + 1 == person_name.size() ||
      person_name.find(' ', space + 1) != std::string_view::npos || person_name.find('.') != std::string_view::npos)
    fail(ErrorCode::invalid_argument, "render_row: person name must be '<first> <last>'");
  if (!lex.has_color(color)) fail(ErrorCode::invalid_argument, "render_row: unknown color '" + std::string(color) + "'");
  const Item* it = lex.find_item(item);
  if (!it) fail(ErrorCode::invalid_argument, "render_row: unknown item '" + std::string(item) + "'");

  std::string out;
  out.reserve(person_name.size() + color.size() + it->plural.size() + 12);
  out.append(person_name).append(" has ").append(std::to_string(count)).append(" ");
  out.append(color).append(" ").append(count == 1 ? it->singular : it->plural).append(".");
  return out;
}

RowFields parse_row(std::string_view sentence, const Lexicons& lex) {
  if (sentence.empty() || sentence.back() != '.')
    throw ParseError(sentence.size(), "expected terminal period");
  std::string_view body = sentence.substr(0, sentence.size() - 1);

  std::size_t pos = 0;
  auto next_token = [&](const char* what) {
    if (pos >= body.size()) throw ParseError(pos, std::string("missing ") + what);
    auto end = body.find(' ', pos);
    if (end == std::string_view::npos) end = body.size();
    if (end == pos) throw ParseError(pos, std::string("empty ") + what);
    auto token = body.substr(pos, end - pos);
    std::size_t start = pos;
    pos = end == body.size() ? end : end + 1;
    return std::pair{token, start};
  };

  std::string_view first = next_token("first name").first;
  std::string_view last = next_token("last name").first;
  auto [verb, verb_at] = next_token("'has'");
  if (verb != "has") throw ParseError(verb_at, "expected 'has'");
  auto [count_text, count_at] = next_token("count");
  int count = 0;
  if (count_text.size() > 2 || count_text.front() == '0') throw ParseError(count_at, "malformed count");
  for (char c : count_text) {
    if (c < '0' || c > '9') throw ParseError(count_at, "malformed count");
    count = count * 10 + (c - '0');
  }
  if (count < kMinCount || count > kMaxCount) throw ParseError(count_at, "count outside [1, 20]");
  auto [color, color_at] = next_token("color");
  if (!lex.has_color(color)) throw ParseError(color_at, "unknown color '" + std::string(color) + "'");
  if (pos >= body.size()) throw ParseError(pos, "missing item");
  std::string_view form = body.substr(pos);
  bool plural = false;
  const Item* item = lex.find_item_form(form, &plural);
  if (!item) throw ParseError(pos, "unknown item '" + std::string(form) + "'");
  // Items whose singular and plural coincide are accepted either way.
  if (item->singular != item->plural && plural != (count != 1))
    throw ParseError(pos, "item number does not agree with count");

  RowFields out;
  out.person_name.append(first).append(" ").append(last);
  out.count = count;
  out.color = std::string(color);
  out.item = item->singular;
  return out;
}

Dataset generate_dataset(std::size_t n, std::uint64_t seed, const Lexicons& lex) {
  validate(lex);
  const std::uint64_t capacity = lex.name_capacity();
  if (n > capacity)
    fail(ErrorCode::capacity, "generate_dataset: " + std::to_string(n) + " rows requested but the name pool holds " +
                                  std::to_string(capacity) + " unique names (" + std::to_string(lex.first_names.size()) +
                                  " first x " + std::to_string(lex.last_names.size()) + " last)");

  rng::Stream names(seed, "synthgen/names");
  rng::Stream counts(seed, "synthgen/counts");
  rng::Stream items(seed, "synthgen/items");
  rng::Stream colors(seed, "synthgen/colors");

  Dataset ds;
  ds.seed = seed;
  ds.lexicon_id = lex.id;
  ds.rows.reserve(n);
  const std::size_t lasts = lex.last_names.size();
  for (std::uint64_t cell : names.sample_without_replacement(capacity, n)) {
    FactRow row;
    row.person_name = lex.first_names[cell / lasts] + " " + lex.last_names[cell % lasts];
    row.count = static_cast<int>(counts.between(kMinCount, kMaxCount));
    row.item = lex.items[items.below(lex.items.size())].singular;
    row.color = lex.colors[colors.below(lex.colors.size())];
    row.sentence = render_row(row.person_name, row.count, row.color, row.item, lex);
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

}  // namespace mecw::synth
