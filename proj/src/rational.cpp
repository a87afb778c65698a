#include "cig/rational.hpp"

#include "cig/core.hpp"

#include <charconv>
#include <numeric>
#include <ostream>

namespace cig {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out))
    throw Error(ErrorCode::RationalOverflow, "multiplication");
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out))
    throw Error(ErrorCode::RationalOverflow, "addition");
  return out;
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last)
    throw Error(ErrorCode::Parse, "not an integer: '" + std::string(text) + "'");
  return value;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator");
  if (den < 0) {
    if (num == INT64_MIN || den == INT64_MIN)
      throw Error(ErrorCode::RationalOverflow, "negation");
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::parse(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text.empty()) throw Error(ErrorCode::Parse, "empty number");

  if (auto slash = text.find('/'); slash != std::string_view::npos)
    return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));

  auto dot = text.find('.');
  if (dot == std::string_view::npos) return Rational(parse_int(text));

  std::string digits(text.substr(0, dot));
  std::string_view frac = text.substr(dot + 1);
  if (frac.find_first_not_of("0123456789") != std::string_view::npos)
    throw Error(ErrorCode::Parse, "not a decimal: '" + std::string(text) + "'");
  if (frac.size() > 18) throw Error(ErrorCode::RationalOverflow, "too many decimals");
  std::int64_t scale = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
  digits += frac;
  if (digits.empty() || digits == "-" || digits == "+")
    throw Error(ErrorCode::Parse, "not a decimal: '" + std::string(text) + "'");
  return Rational(parse_int(digits), scale);
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational& Rational::operator+=(const Rational& rhs) {
  const std::int64_t g = std::gcd(den_, rhs.den_);
  const std::int64_t lhs_scale = rhs.den_ / g;
  const std::int64_t rhs_scale = den_ / g;
  const std::int64_t num = checked_add(checked_mul(num_, lhs_scale), checked_mul(rhs.num_, rhs_scale));
  *this = Rational(num, checked_mul(den_, lhs_scale));
  return *this;
}

Rational& Rational::operator-=(const Rational& rhs) { return *this += -rhs; }

Rational& Rational::operator*=(const Rational& rhs) {
  if (num_ == 0 || rhs.num_ == 0) {
    *this = Rational();
    return *this;
  }
  // Cross-reduce first to keep intermediates small.
  const std::int64_t g1 = std::gcd(num_, rhs.den_);
  const std::int64_t g2 = std::gcd(rhs.num_, den_);
  *this = Rational(checked_mul(num_ / g1, rhs.num_ / g2), checked_mul(den_ / g2, rhs.den_ / g1));
  return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.num_ == 0) throw Error(ErrorCode::InvalidArgument, "division by zero");
  return *this *= Rational(rhs.den_, rhs.num_);
}

Rational operator-(const Rational& a) {
  if (a.num_ == INT64_MIN) throw Error(ErrorCode::RationalOverflow, "negation");
  Rational out;
  out.num_ = -a.num_;
  out.den_ = a.den_;
  return out;
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

}  // namespace cig
