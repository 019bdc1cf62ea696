#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "prequant/field.hpp"
#include "prequant/rho.hpp"

using namespace prequant;

namespace {
constexpr double kPi = oracle::kPi;
}

TEST_CASE("fiber norm examples") {
  const AnalyticFunction f = gaussian_fourier(1, 0.5);
  const double l2 = std::sqrt(2 * kPi * std::sqrt(kPi));
  CHECK(fiber_norm({{0, 1}, f}) == doctest::Approx(std::pow(2.0, 0.25) * l2).epsilon(1e-14));
  CHECK(fiber_norm({{0, 1}, AnalyticFunction()}) == 0.0);
  CHECK(fiber_norm({{3, 0.5}, f}) == doctest::Approx(l2).epsilon(1e-14));
}

TEST_CASE("chart A") {
  const AnalyticFunction f = gaussian_fourier(1, 0.5);
  const FieldElement at_i = triv_A({0, 1}, f);
  CHECK(norm(at_i.coefficient - L2Function(f).scaled(std::pow(2.0, -0.25))) < 1e-15);
  CHECK(fiber_norm(at_i) == doctest::Approx(norm(f)).epsilon(1e-15));

  GridSpec plane;
  plane.config = TorusConfig::uniform(2);
  plane.n_q = 8;
  plane.n_v = 33;
  const L2Function g = random_test_function(2, TestFunctionKind::smooth, plane);
  const FieldElement at_4i = triv_A({0, 4}, g);
  CHECK(norm(at_4i.coefficient - g.scaled(1.0 / std::sqrt(8.0))) < 1e-15 * norm(g));
}

TEST_CASE("chart B") {
  const AnalyticFunction f = gaussian_fourier(1, 0.5);
  const ChartValue at_i = triv_B({{0, 1}, f});
  CHECK(norm(at_i.function - L2Function(f).scaled(std::pow(2.0, 0.25))) < 1e-15);
  CHECK(norm(at_i.function) == doctest::Approx(fiber_norm({{0, 1}, f})).epsilon(1e-15));

  const ChartValue at_2i = triv_B({{0, 2}, f});
  const AnalyticFunction expected(kTwoPi, 1, {{1.0, 0, 0.125, 0.0, std::nullopt}});
  CHECK(norm(at_2i.function - expected) < 1e-15);

  const UpperHalfPlanePoint s(1.5, 0.3);
  const FieldElement back = triv_B_inverse(s, triv_B({s, f}).function);
  CHECK(norm(back.coefficient - f) < 1e-13);
}

TEST_CASE("transition is B after A and the inverse group action") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> re(-5, 5), logim(std::log(0.1), std::log(10.0));
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto kind = seed % 2 == 0 ? TestFunctionKind::smooth : TestFunctionKind::rough;
    const L2Function f = random_test_function(seed, kind);
    const UpperHalfPlanePoint s(re(rng), std::exp(logim(rng)));
    const L2Function moved = transition(s, f);
    CHECK(norm(moved - triv_B(triv_A(s, f)).function) <= 1e-12 * norm(f));
    CHECK(norm(moved - apply_rho(invert(sigma_s(s)), f)) == 0.0);
    CHECK(std::abs(norm(moved) - norm(f)) <= 1e-12 * norm(f));
    const FieldElement psi{s, f};
    CHECK(std::abs(norm(triv_B(psi).function) - fiber_norm(psi)) <= 1e-12 * fiber_norm(psi));
    CHECK(fiber_norm_identity(psi).relative_residual <= 1e-12);
  }
  const L2Function g = gaussian_fourier();
  CHECK(norm(transition({0, 1}, g) - g) == 0.0);
}

TEST_CASE("norm identity against pointwise quadrature") {
  const AnalyticFunction f = random_analytic_function(9, TestFunctionKind::rough);
  const UpperHalfPlanePoint s(-0.8, 2.5);
  const FiberNormIdentity identity = fiber_norm_identity({s, f});
  // (Im s)^{-1/2} * ||f o A^{-1}||^2 * sqrt(2), with the pullback evaluated pointwise.
  const AffineElement inverse = invert(sigma_s(s));
  const double pulled = oracle::pulled_distance(f, inverse, AnalyticFunction()) / std::sqrt(inverse.b());
  const double rhs = std::pow(s.im(), -0.5) * pulled * pulled * std::sqrt(2.0);
  CHECK(identity.change_of_variables == doctest::Approx(rhs).epsilon(1e-8));
  CHECK(identity.direct == doctest::Approx(std::sqrt(2 * s.im()) * oracle::norm(f) * oracle::norm(f)).epsilon(1e-8));
}

TEST_CASE("trivialized sections") {
  const L2Function f = gaussian_fourier();
  const TrivializedSection section{TrivializedSection::Chart::A, f, {{0, 1}, {0, 2}, {1, 0.5}}};
  const auto values = section.evaluate();
  REQUIRE(values.size() == 3);
  for (const auto& psi : values) CHECK(fiber_norm(psi) == doctest::Approx(norm(f)).epsilon(1e-14));
  const TrivializedSection chart_b{TrivializedSection::Chart::B, f, {{0.5, 1.5}}};
  const FieldElement psi = chart_b.at({0.5, 1.5});
  CHECK(norm(triv_B(psi).function - f) < 1e-13);
}

TEST_CASE("section smoothness probe") {
  const L2Function smooth = gaussian_fourier(1, 0.5);
  const std::vector<double> steps{1.6e-3, 8e-4, 4e-4, 2e-4, 1e-4};
  const auto im = section_smoothness_probe(smooth, {0, 1}, ParameterDirection::im, steps);
  const auto re = section_smoothness_probe(smooth, {0, 1}, ParameterDirection::re, steps);
  CHECK(std::abs(im[4].quotient - im[3].quotient) < 1e-3);
  CHECK(std::abs(re[4].quotient - re[3].quotient) < 1e-3);
  CHECK(im.back().quotient == doctest::Approx(norm(rho_generator(CurveInGroup::Kind::beta, smooth.analytic()))).epsilon(1e-3));
  CHECK(re.back().quotient == doctest::Approx(norm(rho_generator(CurveInGroup::Kind::alpha, smooth.analytic()))).epsilon(1e-3));

  const std::vector<double> rough_steps{1e-3, 1e-4, 1e-5, 1e-6};
  const auto rough = section_smoothness_probe(indicator_function(), {0, 1}, ParameterDirection::im, rough_steps);
  for (const auto& sample : rough) {
    CHECK(sample.quotient * std::sqrt(sample.u) == doctest::Approx(std::sqrt(2 * kPi)).epsilon(0.05));
    // Transition along Im at i is rho(beta(-log(1 + u))) on the indicator.
    const double w = std::log1p(sample.u);
    CHECK(sample.quotient * sample.u == doctest::Approx(oracle::indicator_quotient(-w) * w).epsilon(1e-8));
  }
  const std::vector<double> with_zero{0.0};
  CHECK_THROWS_AS(section_smoothness_probe(smooth, {0, 1}, ParameterDirection::im, with_zero), std::invalid_argument);
}
