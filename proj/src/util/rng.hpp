#pragma once

// Deterministic random streams.
//
// Every consumer of randomness draws from a Stream whose seed is derived from
// a base seed, a purpose tag and integer coordinates:
//
//   h0 = splitmix64(base ^ fnv1a64(tag))
//   h_{i+1} = splitmix64(h_i ^ splitmix64(coord_i + 0x9E3779B97F4A7C15))
//
// The resulting 64-bit value seeds a std::mt19937_64 engine (whose output
// sequence is fixed by the C++ standard). Bounded integers use plain rejection
// sampling on the raw 64-bit outputs and doubles take the top 53 bits, so any
// language with an MT19937-64 implementation can reproduce the streams.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace mecw::rng {

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::initializer_list<std::uint64_t> coords = {}) noexcept;

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  Stream(std::uint64_t base, std::string_view tag, std::initializer_list<std::uint64_t> coords = {})
      : engine_(derive_seed(base, tag, coords)) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  // Uniform in [lo, hi], inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  // Uniform in [0, 1).
  double unit();
  bool coin() { return (next() >> 63) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // First `count` entries of a uniform random permutation of [0, population).
  std::vector<std::uint64_t> sample_without_replacement(std::uint64_t population, std::uint64_t count);

 private:
  std::mt19937_64 engine_;
};

}  // namespace mecw::rng
