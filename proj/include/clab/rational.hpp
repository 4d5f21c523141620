#ifndef CLAB_RATIONAL_HPP
#define CLAB_RATIONAL_HPP

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "clab/errors.hpp"

namespace clab {

/// Exact rational on int64 numerator/denominator, always reduced, den > 0.
/// Intermediates run through __int128; results that do not fit back into
/// int64 raise Errc::overflow.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(runtime/explicit)
  Rational(std::int64_t num, std::int64_t den);

  /// Accepts "p/q", plain integers, and decimal strings ("0.125").
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  bool is_negative() const { return num_ < 0; }

  std::int64_t floor() const;
  std::int64_t ceil() const;
  double to_double() const;

  /// Reduced "p/q" form, e.g. "3/2", "-1/4", "5/1".
  std::string fraction_str() const;
  /// Decimal rendering with at most `max_frac` fractional digits,
  /// round-half-even, trailing zeros trimmed ("1.5", "0.333333333", "7").
  std::string decimal_str(int max_frac = 9) const;

  Rational operator-() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  bool operator==(const Rational& o) const {
    return num_ == o.num_ && den_ == o.den_;
  }
  std::strong_ordering operator<=>(const Rational& o) const;

 private:
  static Rational make(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// ceil(a / b) for b > 0; arguments promoted to __int128.
std::int64_t ceil_div(__int128 a, __int128 b);

}  // namespace clab

#endif  // CLAB_RATIONAL_HPP
