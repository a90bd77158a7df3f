#pragma once

#include <array>
#include <cstdint>

namespace ua {

/// SplitMix64 (Steele, Lea, Flood). Used only to expand a 64-bit seed into
/// xoshiro state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();

 private:
  std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman & Vigna). Seeding fills the four state words
/// with consecutive SplitMix64 outputs of the seed. Derived draws:
///   uniform01()      = (next() >> 11) * 2^-53
///   uniform_below(n) = next() % n, rejecting next() < (2^64 - n) % n
///   normal()         = Box-Muller on two uniform01() draws (u1 mapped to 1-u1),
///                      cosine branch only
/// Every distribution here is specified by these formulas, so fixtures
/// reproduce across standard libraries.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);
  explicit Xoshiro256(const std::array<std::uint64_t, 4>& state) : s_(state) {}

  std::uint64_t next();
  std::uint64_t operator()() { return next(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t uniform_below(std::uint64_t bound);
  double normal();

  const std::array<std::uint64_t, 4>& state() const { return s_; }

 private:
  std::array<std::uint64_t, 4> s_;
};

}  // namespace ua
