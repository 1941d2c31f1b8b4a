#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synthgen/lexicons.hpp"
#include "util/error.hpp"

namespace mecw::synth {

inline constexpr int kMinCount = 1;
inline constexpr int kMaxCount = 20;

// The four fields a fact sentence carries. `item` is the singular form.
struct RowFields {
  std::string person_name;
  int count = 0;
  std::string color;
  std::string item;
  bool operator==(const RowFields&) const = default;
};

struct FactRow {
  std::string person_name;  // "<first> <last>"
  int count = 0;
  std::string color;
  std::string item;  // singular form
  std::string sentence;

  std::string_view first_name() const;
  std::string_view last_name() const;
  RowFields fields() const { return {person_name, count, color, item}; }
  bool operator==(const FactRow&) const = default;
};

struct Dataset {
  std::vector<FactRow> rows;
  std::uint64_t seed = 0;
  std::string lexicon_id;
  bool operator==(const Dataset&) const = default;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : Error(ErrorCode::parse, "parse error at byte " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

std::string render_row(std::string_view person_name, int count, std::string_view color, std::string_view item,
                       const Lexicons& lex);
RowFields parse_row(std::string_view sentence, const Lexicons& lex);

// n rows with distinct person names drawn without replacement from the
// first x last name grid. Throws Error(capacity) when n exceeds the grid.
Dataset generate_dataset(std::size_t n, std::uint64_t seed, const Lexicons& lex);

}  // namespace mecw::synth
