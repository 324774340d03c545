#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is a pure function of a 64-bit key and
// a 64-bit counter, so replicas can be scheduled in any order on any number of
// workers and still reproduce bit-for-bit. The mixing function is the
// SplitMix64 finalizer; a stream with key k yields fmix64(k + (i+1)*golden) as
// its i-th word, i.e. SplitMix64 started from state k.

#include <bit>
#include <cstdint>

#include "trap/simd/math.hpp"

namespace trap {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t fmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// i-th word of the stream with the given key.
constexpr std::uint64_t draw(std::uint64_t key, std::uint64_t counter) {
  return fmix64(key + (counter + 1) * kGolden);
}

/// Key splitting: child key for (parent, id). Distinct ids give unrelated keys.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t id) {
  return fmix64(parent ^ fmix64(id * 0xD1B54A32D192ED03ull + kGolden));
}

/// Top 52 bits x mapped to (2x + 1) / 2^53, strictly inside (0, 1).
/// Written as a bit splice so the vector kernels can reproduce it exactly.
inline double unit_open(std::uint64_t bits) {
  const double one_plus = std::bit_cast<double>((bits >> 12) | 0x3FF0000000000000ull);
  return one_plus - (1.0 - 0x1p-53);
}

/// floor(bits * n / 2^64): uniform index in [0, n) with bias below n / 2^64.
constexpr std::uint64_t scale_to(std::uint64_t bits, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * n) >> 64);
}

/// Sequential view of a counter-based stream.
class Stream {
 public:
  constexpr Stream() = default;
  constexpr explicit Stream(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t position() const { return counter_; }

  constexpr std::uint64_t next() { return draw(key_, counter_++); }
  double uniform() { return unit_open(next()); }
  double exponential() { return -simd::ref::log(uniform()); }
  std::uint64_t below(std::uint64_t n) { return scale_to(next(), n); }

  /// Independent child stream; does not advance this one.
  constexpr Stream split(std::uint64_t id) const { return Stream(derive_key(key_, id)); }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace trap
