#include "dnls/rational.hpp"

#include <cctype>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dnls {

namespace {

using Wide = __int128;

Rational from_wide(Wide num, Wide den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    const Wide r = a % b;
    a = b;
    b = r;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  constexpr Wide lo = std::numeric_limits<std::int64_t>::min() + 1;
  constexpr Wide hi = std::numeric_limits<std::int64_t>::max();
  if (num < lo || num > hi || den > hi) throw std::overflow_error("rational arithmetic overflow");
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

std::optional<Wide> parse_decimal(std::string_view s, Wide& den) {
  std::size_t i = 0;
  bool negative = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) negative = s[i++] == '-';
  Wide num = 0;
  den = 1;
  bool any_digit = false, in_fraction = false;
  constexpr Wide limit = Wide(1) << 100;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      num = num * 10 + (c - '0');
      if (in_fraction) den *= 10;
      if (num > limit || den > limit) return std::nullopt;
      any_digit = true;
    } else if (c == '.' && !in_fraction) {
      in_fraction = true;
    } else {
      break;
    }
  }
  if (!any_digit) return std::nullopt;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') return std::nullopt;
    ++i;
    bool negative_exp = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) negative_exp = s[i++] == '-';
    if (i == s.size()) return std::nullopt;
    int exponent = 0;
    for (; i < s.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
      exponent = exponent * 10 + (s[i] - '0');
      if (exponent > 30) return std::nullopt;
    }
    for (int k = 0; k < exponent; ++k) {
      if (negative_exp)
        den *= 10;
      else
        num *= 10;
      if (num > limit || den > limit) return std::nullopt;
    }
  }
  return negative ? -num : num;
}

}  // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) throw std::domain_error("rational with zero denominator");
  Wide n = numerator, d = denominator;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(numerator, denominator);
  num_ = static_cast<std::int64_t>(n / g);
  den_ = static_cast<std::int64_t>(d / g);
}

std::optional<Rational> Rational::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  try {
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
      Wide dn = 1, dd = 1;
      const auto n = parse_decimal(text.substr(0, slash), dn);
      const auto d = parse_decimal(text.substr(slash + 1), dd);
      if (!n || !d || *d == 0) return std::nullopt;
      return from_wide(*n * dd, dn * *d);
    }
    Wide den = 1;
    const auto n = parse_decimal(text, den);
    if (!n) return std::nullopt;
    return from_wide(*n, den);
  } catch (const std::overflow_error&) {
    return std::nullopt;
  }
}

std::string Rational::to_string() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return from_wide(Wide(a.num_) * b.den_ + Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
Rational operator*(const Rational& a, const Rational& b) {
  return from_wide(Wide(a.num_) * b.num_, Wide(a.den_) * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw std::domain_error("rational division by zero");
  return from_wide(Wide(a.num_) * b.den_, Wide(a.den_) * b.num_);
}
Rational Rational::operator-() const { return from_wide(-Wide(num_), den_); }

}  // namespace dnls
