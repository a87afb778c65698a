#include "cig/rational.hpp"
#include "cig/core.hpp"

#include <doctest.h>

#include <cstdint>
#include <limits>

using cig::Rational;

TEST_CASE("rationals stay reduced") {
  const Rational a(6, -8);
  CHECK(a.num() == -3);
  CHECK(a.den() == 4);
  CHECK((Rational(1, 3) + Rational(1, 6)) == Rational(1, 2));
  CHECK((Rational(2, 3) * Rational(3, 4)) == Rational(1, 2));
  CHECK((Rational(1) / Rational(1, 8)) == Rational(8));
  CHECK((Rational(1, 2) - Rational(1, 2)) == Rational(0));
  CHECK(Rational(0).den() == 1);
}

TEST_CASE("ordering and conversion") {
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(-1, 2) < Rational(0));
  CHECK(abs(Rational(-3, 7)) == Rational(3, 7));
  CHECK(Rational(1, 4).to_double() == 0.25);
  CHECK(static_cast<double>(Rational(3, 8)) == 0.375);
}

TEST_CASE("parsing and printing") {
  CHECK(Rational::parse("3") == Rational(3));
  CHECK(Rational::parse("-2/6") == Rational(-1, 3));
  CHECK(Rational::parse("0.125") == Rational(1, 8));
  CHECK(Rational::parse("-1.5") == Rational(-3, 2));
  CHECK(Rational(1, 8).str() == "1/8");
  CHECK(Rational(4).str() == "4");
  for (const char* bad : {"", "1/0", "a", "1/", "1.2.3", "3/x"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(Rational::parse(bad), cig::Error);
  }
}

TEST_CASE("overflow is detected rather than wrapped") {
  const Rational big(std::numeric_limits<std::int64_t>::max() / 2 + 1);
  try {
    (void)(big + big);
    FAIL("no overflow reported");
  } catch (const cig::Error& e) {
    CHECK(e.code() == cig::ErrorCode::RationalOverflow);
  }
  CHECK_THROWS_AS(Rational(1, 0), cig::Error);
}

TEST_CASE("rationals work as an Eigen scalar") {
  Eigen::Matrix<Rational, 2, 2> m;
  m << Rational(1, 2), Rational(1, 3), Rational(1, 4), Rational(1, 5);
  Eigen::Matrix<Rational, 2, 1> v;
  v << Rational(2), Rational(3);
  const Eigen::Matrix<Rational, 2, 1> out = m * v;
  CHECK(out(0) == Rational(2));
  CHECK(out(1) == Rational(11, 10));
  CHECK(m.sum() == Rational(77, 60));
}
