#include "synthgen/lexicons.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "util/digest.hpp"
#include "util/error.hpp"
#include "util/resources.hpp"

namespace mecw::synth {

using nlohmann::json;

namespace {

bool is_token(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '.') return false;
  return true;
}

bool is_item_form(std::string_view s) {
  if (s.empty() || s.front() == ' ' || s.back() == ' ') return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '\t' || c == '\n' || c == '\r' || c == '.') return false;
    if (c == ' ' && i > 0 && s[i - 1] == ' ') return false;
  }
  return true;
}

template <typename Range>
void check_unique_tokens(const Range& values, const char* what) {
  std::set<std::string_view> seen;
  for (const auto& v : values) {
    if (!is_token(v))
      fail(ErrorCode::invalid_argument, std::string("lexicon: ") + what + " entry '" + std::string(v) +
                                            "' must be a nonempty token without spaces or periods");
    if (!seen.insert(v).second)
      fail(ErrorCode::invalid_argument, std::string("lexicon: duplicate ") + what + " entry '" + std::string(v) + "'");
  }
}

std::vector<std::string> string_list(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array())
    fail(ErrorCode::invalid_argument, std::string("lexicon: missing array '") + key + "'");
  std::vector<std::string> out;
  for (const auto& v : doc[key]) {
    if (!v.is_string()) fail(ErrorCode::invalid_argument, std::string("lexicon: non-string entry in '") + key + "'");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

const Item* Lexicons::find_item(std::string_view singular) const {
  for (const auto& item : items)
    if (item.singular == singular) return &item;
  return nullptr;
}

const Item* Lexicons::find_item_form(std::string_view form, bool* is_plural) const {
  for (const auto& item : items) {
    if (item.plural == form) {
      if (is_plural) *is_plural = true;
      return &item;
    }
    if (item.singular == form) {
      if (is_plural) *is_plural = false;
      return &item;
    }
  }
  return nullptr;
}

bool Lexicons::has_color(std::string_view color) const {
  for (const auto& c : colors)
    if (c == color) return true;
  return false;
}

void validate(const Lexicons& lex) {
  if (lex.items.size() != kItemCount)
    fail(ErrorCode::invalid_argument,
         "lexicon: items must have exactly 15 entries, got " + std::to_string(lex.items.size()));
  if (lex.colors.size() != kColorCount)
    fail(ErrorCode::invalid_argument,
         "lexicon: colors must have exactly 9 entries, got " + std::to_string(lex.colors.size()));
  if (lex.first_names.empty() || lex.last_names.empty())
    fail(ErrorCode::invalid_argument, "lexicon: name lists must be nonempty");
  check_unique_tokens(lex.first_names, "first_names");
  check_unique_tokens(lex.last_names, "last_names");
  check_unique_tokens(lex.colors, "colors");
  std::set<std::string_view> forms;
  for (const auto& item : lex.items) {
    if (!is_item_form(item.singular) || !is_item_form(item.plural))
      fail(ErrorCode::invalid_argument, "lexicon: malformed item form '" + item.singular + "'/'" + item.plural + "'");
    if (!forms.insert(item.singular).second)
      fail(ErrorCode::invalid_argument, "lexicon: duplicate item form '" + item.singular + "'");
    if (item.plural != item.singular && !forms.insert(item.plural).second)
      fail(ErrorCode::invalid_argument, "lexicon: duplicate item form '" + item.plural + "'");
  }
}

std::string canonical_json(const Lexicons& lex) {
  json items = json::array();
  for (const auto& item : lex.items) items.push_back({{"singular", item.singular}, {"plural", item.plural}});
  json doc = {{"first_names", lex.first_names},
              {"last_names", lex.last_names},
              {"items", items},
              {"colors", lex.colors}};
  return doc.dump();
}

Lexicons parse_lexicons(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) fail(ErrorCode::parse, "lexicon: not a JSON object");
  Lexicons lex;
  lex.first_names = string_list(doc, "first_names");
  lex.last_names = string_list(doc, "last_names");
  lex.colors = string_list(doc, "colors");
  if (!doc.contains("items") || !doc["items"].is_array())
    fail(ErrorCode::invalid_argument, "lexicon: missing array 'items'");
  for (const auto& v : doc["items"]) {
    if (!v.is_object() || !v.contains("singular") || !v.contains("plural") || !v["singular"].is_string() ||
        !v["plural"].is_string())
      fail(ErrorCode::invalid_argument, "lexicon: items entries need string 'singular' and 'plural'");
    lex.items.push_back({v["singular"].get<std::string>(), v["plural"].get<std::string>()});
  }
  validate(lex);
  lex.id = "sha256:" + sha256_hex(canonical_json(lex));
  return lex;
}

Lexicons load_lexicons(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::not_found, "lexicon: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lexicons(buf.str());
}

const Lexicons& default_lexicons() {
  static const Lexicons lex = parse_lexicons(resources::default_lexicon_json());
  return lex;
}

}  // namespace mecw::synth
