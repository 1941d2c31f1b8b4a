#include "util/rng.hpp"

#include <unordered_map>

#include "util/error.hpp"

namespace mecw::rng {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = splitmix64(base ^ fnv1a64(tag));
  for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + 0x9E3779B97F4A7C15ULL));
  return h;
}

std::uint64_t Stream::below(std::uint64_t bound) {
  if (bound == 0) fail(ErrorCode::invalid_argument, "rng: empty range");
  // 2^64 mod bound, computed without 128-bit arithmetic.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t x = next();
    if (x >= threshold) return x % bound;
  }
}

std::int64_t Stream::between(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) fail(ErrorCode::invalid_argument, "rng: inverted range");
  auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(below(span));
}

double Stream::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::vector<std::uint64_t> Stream::sample_without_replacement(std::uint64_t population,
                                                              std::uint64_t count) {
  if (count > population) fail(ErrorCode::capacity, "rng: sample larger than population");
  // Sparse Fisher-Yates: only displaced slots are materialized.
  std::unordered_map<std::uint64_t, std::uint64_t> displaced;
  auto slot = [&](std::uint64_t i) {
    auto it = displaced.find(i);
    return it == displaced.end() ? i : it->second;
  };
  std::vector<std::uint64_t> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t j = i + below(population - i);
    std::uint64_t vi = slot(i);
    std::uint64_t vj = slot(j);
    out.push_back(vj);
    displaced[j] = vi;
  }
  return out;
}

}  // namespace mecw::rng
