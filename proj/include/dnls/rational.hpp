#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dnls {

// Exact rational with 64-bit numerator and positive denominator, always in
// lowest terms. Arithmetic throws std::overflow_error instead of wrapping.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t numerator, std::int64_t denominator = 1);

  // Accepts "p/q", integers and finite decimals such as "-2.5e-1"; the decimal
  // value is converted exactly. Returns nullopt for anything else.
  static std::optional<Rational> parse(std::string_view text);

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  int sign() const { return (num_ > 0) - (num_ < 0); }
  bool is_zero() const { return num_ == 0; }
  std::string to_string() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const;
  friend bool operator==(const Rational& a, const Rational& b) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace dnls
