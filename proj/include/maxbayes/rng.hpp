#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace maxbayes {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent stream seed for (master, stream-id); serial and parallel runs agree.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return mix64(mix64(master) ^ mix64(stream + 0x632BE59BD9B4E019ull));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
  return Rng(split_seed(master, stream));
}

/// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  // 53 random bits shifted off zero.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> n01;
  return n01(rng);
}

inline double standard_exponential(Rng& rng) {
  return -std::log(uniform_open(rng));
}

}  // namespace maxbayes
