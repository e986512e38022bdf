#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>

namespace lobtrend {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: every draw is a pure function of
/// (key, counter, draw number), so streams can be split and replayed.
class CounterRng {
 public:
  CounterRng(std::uint64_t key, std::uint64_t counter)
      : state_(splitmix64(splitmix64(key ^ 0x6a09e667f3bcc909ULL) + counter * 0xd1b54a32d192ed03ULL)) {}
  explicit CounterRng(std::uint64_t key) : CounterRng(key, 0) {}

  std::uint64_t next_u64() { return splitmix64(state_ + (draw_++) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift; the bias is < n / 2^64.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Exponential with the given mean.
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t state_;
  std::uint64_t draw_ = 0;
};

}  // namespace lobtrend
