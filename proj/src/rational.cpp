#include "clab/rational.hpp"

#include <charconv>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace clab {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr __int128 kInt64Min = std::numeric_limits<std::int64_t>::min();
constexpr __int128 kInt64Max = std::numeric_limits<std::int64_t>::max();

std::int64_t narrow(__int128 v, const char* what) {
  if (v < kInt64Min || v > kInt64Max)
    raise(Errc::overflow, std::string("rational ") + what + " out of range");
  return static_cast<std::int64_t>(v);
}

std::int64_t parse_int(std::string_view s, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    raise(Errc::schema, std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

}  // namespace

Rational Rational::make(__int128 num, __int128 den) {
  if (den == 0) raise(Errc::invalid_argument, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  Rational r;
  r.num_ = narrow(num, "numerator");
  r.den_ = narrow(den, "denominator");
  return r;
}

Rational::Rational(std::int64_t num, std::int64_t den) {
  *this = make(num, den);
}

Rational Rational::parse(std::string_view text) {
  if (text.empty()) raise(Errc::schema, "empty rational");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t p = parse_int(text.substr(0, slash), "numerator");
    std::int64_t q = parse_int(text.substr(slash + 1), "denominator");
    if (q == 0) raise(Errc::schema, "zero denominator in '" + std::string(text) + "'");
    return Rational(p, q);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 18)
      raise(Errc::schema, "bad decimal '" + std::string(text) + "'");
    bool negative = !int_part.empty() && int_part.front() == '-';
    if (negative) int_part.remove_prefix(1);
    else if (!int_part.empty() && int_part.front() == '+') int_part.remove_prefix(1);
    __int128 whole = int_part.empty() ? 0 : parse_int(int_part, "integer part");
    __int128 scale = 1;
    for (char c : frac) {
      if (c < '0' || c > '9')
        raise(Errc::schema, "bad decimal '" + std::string(text) + "'");
      scale *= 10;
    }
    __int128 num = whole * scale + parse_int(frac, "fraction");
    if (negative) num = -num;
    return make(num, scale);
  }
  return Rational(parse_int(text, "integer"));
}

std::int64_t Rational::floor() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

std::int64_t Rational::ceil() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ > 0) ++q;
  return q;
}

double Rational::to_double() const {
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::fraction_str() const {
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string Rational::decimal_str(int max_frac) const {
  __int128 scale = 1;
  for (int i = 0; i < max_frac; ++i) scale *= 10;
  __int128 n = num_ < 0 ? -static_cast<__int128>(num_) : num_;
  __int128 scaled = n * scale;
  __int128 q = scaled / den_;
  __int128 r = scaled % den_;
  // round half to even
  __int128 twice = r * 2;
  if (twice > den_ || (twice == den_ && (q & 1) != 0)) ++q;
  __int128 whole = q / scale;
  __int128 frac = q % scale;
  std::string out;
  if (num_ < 0 && (whole != 0 || frac != 0)) out += '-';
  out += std::to_string(static_cast<std::int64_t>(whole));
  if (frac != 0) {
    std::string digits(static_cast<std::size_t>(max_frac), '0');
    for (int i = max_frac - 1; i >= 0; --i) {
      digits[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(frac % 10));
      frac /= 10;
    }
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    out += '.';
    out += digits;
  }
  return out;
}

Rational Rational::operator-() const {
  return make(-static_cast<__int128>(num_), den_);
}

Rational Rational::operator+(const Rational& o) const {
  return make(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
              static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
  return make(static_cast<__int128>(num_) * o.den_ - static_cast<__int128>(o.num_) * den_,
              static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
  return make(static_cast<__int128>(num_) * o.num_,
              static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num_ == 0) raise(Errc::invalid_argument, "rational division by zero");
  return make(static_cast<__int128>(num_) * o.den_,
              static_cast<__int128>(den_) * o.num_);
}

std::strong_ordering Rational::operator<=>(const Rational& o) const {
  __int128 lhs = static_cast<__int128>(num_) * o.den_;
  __int128 rhs = static_cast<__int128>(o.num_) * den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::int64_t ceil_div(__int128 a, __int128 b) {
  __int128 q = a / b;
  if (a % b != 0 && ((a < 0) == (b < 0))) ++q;
  if (q < kInt64Min || q > kInt64Max) raise(Errc::overflow, "ceil_div out of range");
  return static_cast<std::int64_t>(q);
}

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::syntax: return "SyntaxError";
    case Errc::schema: return "SchemaError";
    case Errc::unknown_behavior: return "UnknownBehavior";
    case Errc::unknown_preset: return "UnknownPreset";
    case Errc::capacity_exceeded: return "CapacityExceeded";
    case Errc::missing_layer_hosts: return "MissingLayerHosts";
    case Errc::phase: return "PhaseError";
    case Errc::corrupt_archive: return "CorruptArchive";
    case Errc::no_samples: return "NoSamples";
    case Errc::continuous_dimension: return "ContinuousDimension";
    case Errc::exhausted_space: return "ExhaustedSpace";
    case Errc::non_numeric_parameter: return "NonNumericParameter";
    case Errc::overflow: return "Overflow";
    case Errc::io: return "IoError";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace clab
