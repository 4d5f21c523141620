#ifndef CLAB_RNG_HPP
#define CLAB_RNG_HPP

#include <cstdint>
#include <string_view>
#include <type_traits>

#include "clab/rational.hpp"

namespace clab {

/// SplitMix64 (Steele/Lea/Flood). One instance per deterministic stream;
/// streams never share state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound); bound >= 1. Modulo reduction, fixed one draw.
  std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

  /// Uniform double in [0, 1), 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// True with probability p (exact integer comparison, one draw).
  bool bernoulli(const Rational& p) {
    std::uint64_t u = next();
    if (p.num() <= 0) return false;
    unsigned __int128 lhs =
        static_cast<unsigned __int128>(u) * static_cast<unsigned __int128>(p.den());
    unsigned __int128 rhs =
        static_cast<unsigned __int128>(p.num()) << 64;
    return lhs < rhs;
  }

 private:
  std::uint64_t state_;
};

/// FNV-1a 64-bit over a delimited field encoding: integers absorbed as
/// 8 little-endian bytes, strings as raw bytes followed by a 0xFF
/// separator. Used to derive every stream seed from the master seed.
class SeedHash {
 public:
  template <typename T>
    requires std::is_integral_v<T>
  SeedHash& field(T v) {
    std::uint64_t bits;
    if constexpr (std::is_signed_v<T>)
      bits = static_cast<std::uint64_t>(static_cast<std::int64_t>(v));
    else
      bits = static_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      absorb(static_cast<std::uint8_t>(bits & 0xFF));
      bits >>= 8;
    }
    return *this;
  }

  SeedHash& field(std::string_view s) {
    for (unsigned char c : s) absorb(c);
    absorb(0xFF);
    return *this;
  }

  std::uint64_t value() const { return hash_; }

 private:
  void absorb(std::uint8_t byte) {
    hash_ ^= byte;
    hash_ *= 0x100000001B3ULL;
  }

  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

template <typename... Fields>
std::uint64_t hash64(Fields&&... fields) {
  SeedHash h;
  (h.field(fields), ...);
  return h.value();
}

}  // namespace clab

#endif  // CLAB_RNG_HPP
