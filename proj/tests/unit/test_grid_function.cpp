#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "prequant/errors.hpp"
#include "prequant/grid_function.hpp"

using namespace prequant;

namespace {
constexpr double kPi = 3.14159265358979323846;

GridSpec small_spec(int n_v = 257) {
  GridSpec spec;
  spec.n_q = 16;
  spec.n_v = n_v;
  return spec;
}

GridFunction gaussian(const GridSpec& spec, double rate, int k = 1) {
  return GridFunction::sample(spec, [=](std::span<const double> q, std::span<const double> v) {
    return std::polar(std::exp(-rate * v[0] * v[0]), k * q[0]);
  });
}
}  // namespace

TEST_CASE("grid spec validation") {
  CHECK_NOTHROW(GridSpec{}.validate());
  GridSpec bad;
  bad.n_q = 12;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = GridSpec{};
  bad.n_q = 4;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = GridSpec{};
  bad.n_v = 15;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = GridSpec{};
  bad.margin_factor = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("quadrature weights reproduce the window volume") {
  for (int m : {1, 2}) {
    GridSpec spec = small_spec(33);
    spec.config = TorusConfig{m, std::vector<double>(m, 3.0)};
    const auto weights = spec.quadrature_weights();
    CHECK(weights.size() == spec.size());
    CHECK(std::all_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; }));
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    CHECK(total == doctest::Approx(std::pow(3.0 * 2.0 * spec.v_window, m)).epsilon(1e-14));
    CHECK(spec.total_volume() == doctest::Approx(total).epsilon(1e-14));
  }
}

TEST_CASE("grid norm converges to the analytic Gaussian norm") {
  const double exact = std::sqrt(2 * kPi * std::sqrt(kPi));
  CHECK(norm(gaussian(GridSpec{}, 0.5)) == doctest::Approx(exact).epsilon(1e-12));
  CHECK(norm(GridFunction::zero(small_spec())) == 0.0);
  CHECK(std::abs(inner(gaussian(small_spec(), 0.5, 1), gaussian(small_spec(), 0.5, 2))) < 1e-14);
  // Sampling an analytic function goes through the same pointwise values.
  const GridFunction sampled = GridFunction::sample(small_spec(), gaussian_fourier(1, 0.5));
  CHECK(norm(sampled - gaussian(small_spec(), 0.5)) < 1e-13);
}

TEST_CASE("support radius") {
  const GridFunction f = gaussian(GridSpec{}, 2.0);
  const double r = f.support_radius(1e-13);
  CHECK(r == doctest::Approx(std::sqrt(std::log(1e13) / 2.0)).epsilon(0.01));
  CHECK(GridFunction::zero(small_spec()).support_radius() == 0.0);
}

TEST_CASE("pullback against exact composition") {
  const GridSpec spec;
  const GridFunction f = gaussian(spec, 2.0);
  CHECK(norm(f.pullback(AffineElement::identity()) - f) < 1e-14);
  const AffineElement sigma(0.3, 0.7);
  const GridFunction exact = GridFunction::sample(spec, [&](std::span<const double> q, std::span<const double> v) {
    const double w = sigma.b() * v[0];
    return std::polar(std::exp(-2.0 * w * w), q[0] + sigma.a() * v[0]);
  });
  CHECK(norm(f.pullback(sigma) - exact) / norm(f) < 1e-8);
}

TEST_CASE("pullback error converges at fourth order in the v spacing") {
  const AffineElement sigma(0.3, 0.7);
  std::vector<double> errors;
  for (int n_v : {129, 257, 513}) {
    const GridSpec spec = small_spec(n_v);
    const GridFunction f = gaussian(spec, 2.0);
    const GridFunction exact = GridFunction::sample(spec, [&](std::span<const double> q, std::span<const double> v) {
      const double w = sigma.b() * v[0];
      return std::polar(std::exp(-2.0 * w * w), q[0] + sigma.a() * v[0]);
    });
    errors.push_back(norm(f.pullback(sigma) - exact));
  }
  CHECK(std::log2(errors[0] / errors[1]) > 3.0);
  CHECK(std::log2(errors[1] / errors[2]) > 3.0);
}

TEST_CASE("pullback composes in right-action order on the grid") {
  const GridSpec spec;
  const GridFunction f = gaussian(spec, 2.0);
  const AffineElement s1(0.4, 0.9), s2(-1.1, 1.2);
  const GridFunction twice = f.pullback(s1).pullback(s2);
  CHECK(norm(twice - f.pullback(compose(s2, s1))) / norm(f) < 1e-7);
}

TEST_CASE("dilation beyond the support margin is reported") {
  const GridFunction f = gaussian(GridSpec{}, 0.5);
  CHECK_THROWS_AS(f.pullback(beta(std::log(0.2))), SupportMarginError);
  CHECK_NOTHROW(f.pullback(beta(0.5)));
}

TEST_CASE("mismatched grids are rejected") {
  CHECK_THROWS_AS(inner(gaussian(small_spec(129), 0.5), gaussian(small_spec(257), 0.5)),
                  BackendMismatchError);
  CHECK_THROWS_AS(gaussian(small_spec(129), 0.5) + gaussian(small_spec(257), 0.5),
                  BackendMismatchError);
}

TEST_CASE("derivatives") {
  const GridSpec spec;
  const GridFunction f = gaussian(spec, 0.5);
  const GridFunction dq = f.derivative_q(0);
  CHECK(norm(dq - f.scaled({0.0, 1.0})) < 1e-12);
  const GridFunction dv = f.derivative_v(0);
  const GridFunction expected = f.transformed([](auto, std::span<const double> v, std::complex<double> x) {
    return -v[0] * x;
  });
  CHECK(norm(dv - expected) / norm(f) < 1e-7);
}

TEST_CASE("two-dimensional grid pullback") {
  GridSpec spec;
  spec.config = TorusConfig::uniform(2);
  spec.n_q = 8;
  spec.n_v = 129;
  const auto sample = [&](const AffineElement& sigma) {
    return GridFunction::sample(spec, [&](std::span<const double> q, std::span<const double> v) {
      std::complex<double> value = 1.0;
      for (int j = 0; j < 2; ++j) {
        const double w = sigma.b() * v[j];
        value *= std::polar(std::exp(-1.0 * w * w), q[j] + sigma.a() * v[j]);
      }
      return value;
    });
  };
  const AffineElement sigma(0.2, 0.9);
  const GridFunction f = sample(AffineElement::identity());
  CHECK(norm(f.pullback(sigma) - sample(sigma)) / norm(f) < 1e-4);
  CHECK(std::abs(norm(f) - std::sqrt(kTwoPi * kTwoPi * kPi / 2.0)) < 1e-10);
}

TEST_CASE("snapshot formats") {
  GridSpec spec = small_spec(17);
  spec.n_q = 8;
  const GridFunction f = gaussian(spec, 0.5);

  std::ostringstream csv;
  f.write_csv(csv);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "q1,v1,re,im");
  std::size_t count = 0;
  for (std::string line; std::getline(lines, line);) ++count;
  CHECK(count == spec.size());

  std::ostringstream binary;
  f.write_binary(binary);
  const std::string bytes = binary.str();
  CHECK(bytes.substr(0, 4) == "PQGF");
  std::int32_t m = 0, n_q = 0, n_v = 0;
  double window = 0.0;
  std::memcpy(&m, bytes.data() + 4, 4);
  std::memcpy(&n_q, bytes.data() + 8, 4);
  std::memcpy(&n_v, bytes.data() + 12, 4);
  std::memcpy(&window, bytes.data() + 16, 8);
  CHECK(m == 1);
  CHECK(n_q == 8);
  CHECK(n_v == 17);
  CHECK(window == spec.v_window);
  CHECK(bytes.size() == 4 + 12 + 8 + 8 + 16 * spec.size());
  double re0 = 0.0;
  std::memcpy(&re0, bytes.data() + 32, 8);
  CHECK(re0 == f.values()[0].real());
}
