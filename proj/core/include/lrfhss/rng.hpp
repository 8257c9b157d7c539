#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace lrfhss::mc {

/// splitmix64 output mixer.
constexpr std::uint64_t splitmix_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream. The starting state is a hash of a key path
/// such as (seed, trial, message, gateway), so any sub-stream can be replayed
/// without touching the others. Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t state) : state_(state) {}

  static constexpr Stream keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix_mix(seed ^ 0x6a09e667f3bcc909ULL);
    for (const std::uint64_t p : path) h = splitmix_mix(h ^ (p + 0x9e3779b97f4a7c15ULL));
    return Stream(h);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix_mix(state_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return ((*this)() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

  /// Exponential with unit mean; strictly positive.
  double exponential() { return -std::log(uniform()); }

 private:
  std::uint64_t state_;
};

}  // namespace lrfhss::mc
