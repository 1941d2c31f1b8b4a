#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mecw::synth {

inline constexpr std::size_t kItemCount = 15;
inline constexpr std::size_t kColorCount = 9;

struct Item {
  std::string singular;
  std::string plural;
  bool operator==(const Item&) const = default;
};

// Vocabulary for fact rows. Names and colors are single tokens; items carry
// explicit singular and plural forms.
struct Lexicons {
  std::vector<std::string> first_names;
  std::vector<std::string> last_names;
  std::vector<Item> items;
  std::vector<std::string> colors;
  // "sha256:<hex>" over the canonical JSON serialization.
  std::string id;

  std::size_t name_capacity() const { return first_names.size() * last_names.size(); }
  const Item* find_item(std::string_view singular) const;
  const Item* find_item_form(std::string_view form, bool* is_plural = nullptr) const;
  bool has_color(std::string_view color) const;
};

// Throws Error(invalid_argument) describing the first violated rule.
void validate(const Lexicons& lex);

Lexicons parse_lexicons(std::string_view json_text);
Lexicons load_lexicons(const std::string& path);
const Lexicons& default_lexicons();

std::string canonical_json(const Lexicons& lex);

}  // namespace mecw::synth
