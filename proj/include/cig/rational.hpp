#pragma once

// Exact rationals over 64-bit integers, usable as an Eigen scalar. Every
// operation reduces to lowest terms and throws RationalOverflow instead of
// wrapping.

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace cig {

class Rational {
 public:
  constexpr Rational() noexcept = default;
  Rational(std::int64_t num) noexcept : num_(num) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  explicit operator double() const noexcept { return to_double(); }

  // Accepts "p", "p/q" and plain decimals such as "-0.125".
  static Rational parse(std::string_view text);
  std::string str() const;

  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a);

  friend bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

inline Rational abs(const Rational& r) { return r < Rational(0) ? -r : r; }

// Conversion used by the generic (scalar-templated) code paths.
inline double to_double(double x) noexcept { return x; }
inline double to_double(const Rational& x) noexcept { return x.to_double(); }

}  // namespace cig

namespace Eigen {

template <>
struct NumTraits<cig::Rational> : GenericNumTraits<cig::Rational> {
  using Real = cig::Rational;
  using NonInteger = cig::Rational;
  using Nested = cig::Rational;
  using Literal = cig::Rational;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 8,
    MulCost = 8
  };
  static inline cig::Rational epsilon() { return cig::Rational(0); }
  static inline cig::Rational dummy_precision() { return cig::Rational(0); }
  static inline cig::Rational highest() { return cig::Rational(INT64_MAX); }
  static inline cig::Rational lowest() { return cig::Rational(-INT64_MAX); }
  static inline int digits10() { return 18; }
};

}  // namespace Eigen
