#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace catbrw {

// Purposes get disjoint stream families so that, e.g., excursion sampling and
// population simulation never share draws for the same (seed, index).
enum class StreamTag : std::uint64_t {
  Excursion = 1,
  Population = 2,
  Occupation = 3,
};

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) noexcept { return splitmix64(x); }

// xoshiro256++ keyed by (seed, tag, index). Every replicate owns one stream, so
// results do not depend on how replicates are scheduled across threads.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, StreamTag tag, std::uint64_t index) noexcept {
    std::uint64_t key = mix64(seed) ^ mix64(static_cast<std::uint64_t>(tag) * 0xD1B54A32D192ED03ull);
    key ^= mix64(index + 0x632BE59BD9B4E019ull);
    for (auto& word : state_) word = splitmix64(key);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // [0, 1)
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double uniform_pos() noexcept { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  double exponential(double rate) noexcept { return -std::log(uniform_pos()) / rate; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
};

}  // namespace catbrw
