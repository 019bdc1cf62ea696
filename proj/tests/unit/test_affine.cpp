#include <doctest.h>

#include <cmath>
#include <random>

#include "prequant/affine.hpp"

using namespace prequant;

TEST_CASE("compose follows (first * second)(t) = first(second(t))") {
  CHECK(compose({1, 2}, {3, 1}) == AffineElement(7, 2));
  const AffineElement sigma(-1.25, 0.5);
  CHECK(compose(sigma, AffineElement::identity()) == sigma);
  CHECK(compose(AffineElement::identity(), sigma) == sigma);
  CHECK(compose(alpha(0.75), beta(0.5)) == AffineElement(0.75, std::exp(0.5)));
  for (double t : {-3.0, 0.0, 0.5, 11.0}) {
    const AffineElement first(0.5, 4.0), second(-2.0, 0.25);
    CHECK(compose(first, second).apply(t) == doctest::Approx(first.apply(second.apply(t))).epsilon(1e-15));
  }
}

TEST_CASE("invert examples and group identities") {
  CHECK(invert({0, 2}) == AffineElement(0, 0.5));
  CHECK(invert(alpha(1.5)) == alpha(-1.5));
  CHECK(invert({1, 2}) == AffineElement(-0.5, 0.5));
  CHECK(compose(AffineElement(1, 2), invert({1, 2})) == AffineElement::identity());
}

TEST_CASE("chi is the dilation part and a homomorphism") {
  CHECK(chi(beta(0.3)) == doctest::Approx(std::exp(0.3)));
  CHECK(chi(alpha(7.0)) == 1.0);
  CHECK(chi(sigma_s({0.4, 2.5})) == 2.5);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(-5, 5), logb(-2, 2);
  for (int i = 0; i < 100; ++i) {
    const AffineElement x(a(rng), std::exp(logb(rng))), y(a(rng), std::exp(logb(rng)));
    CHECK(chi(compose(x, y)) == doctest::Approx(chi(x) * chi(y)).epsilon(1e-15));
  }
}

TEST_CASE("sigma_s maps i to s") {
  CHECK(sigma_s({0, 1}) == AffineElement::identity());
  CHECK(sigma_s({0, 2}) == AffineElement(0, 2));
  CHECK(sigma_s({1, 3}) == AffineElement(1, 3));
  const UpperHalfPlanePoint s(-2.5, 0.125);
  CHECK(sigma_s(s).apply(std::complex<double>(0, 1)) == s.value());
}

TEST_CASE("one-parameter subgroups") {
  CHECK(alpha(0) == AffineElement::identity());
  CHECK(beta(0) == AffineElement::identity());
  CHECK(beta(std::log(2.0)).b() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(compose(alpha(0.25), alpha(0.5)) == alpha(0.75));
  CHECK(compose(beta(0.25), beta(0.5)).b() == doctest::Approx(beta(0.75).b()).epsilon(1e-15));
}

TEST_CASE("associativity on dyadic samples is exact") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> num(-64, 64), exponent(-3, 3);
  for (int i = 0; i < 100; ++i) {
    auto sample = [&] { return AffineElement(num(rng) / 8.0, std::ldexp(1.0, exponent(rng))); };
    const AffineElement x = sample(), y = sample(), z = sample();
    CHECK(compose(compose(x, y), z) == compose(x, compose(y, z)));
  }
}

TEST_CASE("associativity on random samples holds to rounding") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> a(-5, 5), logb(-2, 2);
  for (int i = 0; i < 100; ++i) {
    auto sample = [&] { return AffineElement(a(rng), std::exp(logb(rng))); };
    const AffineElement x = sample(), y = sample(), z = sample();
    const AffineElement lhs = compose(compose(x, y), z), rhs = compose(x, compose(y, z));
    CHECK(lhs.a() == doctest::Approx(rhs.a()).epsilon(1e-13));
    CHECK(lhs.b() == doctest::Approx(rhs.b()).epsilon(1e-15));
  }
}

TEST_CASE("invalid elements are rejected") {
  CHECK_THROWS_AS(AffineElement(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(AffineElement(0, -1), std::invalid_argument);
  CHECK_THROWS_AS(AffineElement(NAN, 1), std::invalid_argument);
  CHECK_THROWS_AS(AffineElement(0, INFINITY), std::invalid_argument);
  CHECK_THROWS_AS(UpperHalfPlanePoint(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(UpperHalfPlanePoint(1, -2), std::invalid_argument);
  CHECK_THROWS_AS(UpperHalfPlanePoint(std::complex<double>(0, -1)), std::invalid_argument);
}
