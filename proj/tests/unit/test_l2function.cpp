#include <doctest.h>

#include "prequant/errors.hpp"
#include "prequant/l2function.hpp"

using namespace prequant;

TEST_CASE("backend tagging") {
  const L2Function a = gaussian_fourier();
  const L2Function g = GridFunction::sample(GridSpec{}, gaussian_fourier());
  CHECK(a.is_analytic());
  CHECK(a.backend_name() == "analytic");
  CHECK(g.is_grid());
  CHECK(g.dimension() == 1);
  CHECK_THROWS_AS(inner(a, g), BackendMismatchError);
  CHECK_THROWS_AS(a - g, BackendMismatchError);
}

TEST_CASE("backend agreement converges with order at least three") {
  const AnalyticFunction f = gaussian_fourier(1, 2.0);
  std::vector<double> gaps;
  for (int n_v : {33, 65, 129}) {
    GridSpec spec;
    spec.n_q = 8;
    spec.n_v = n_v;
    gaps.push_back(std::abs(norm(L2Function(GridFunction::sample(spec, f))) - norm(f)));
  }
  CHECK(std::log2(gaps[0] / gaps[1]) >= 3.0);
  CHECK((gaps[2] < 1e-12 || std::log2(gaps[1] / gaps[2]) >= 3.0));
}

TEST_CASE("grid and analytic pullbacks agree") {
  GridSpec spec;
  const AnalyticFunction f = gaussian_fourier(1, 2.0);
  const AffineElement sigma(0.7, 1.3);
  const L2Function grid_pulled = L2Function(GridFunction::sample(spec, f)).pullback(sigma);
  const L2Function sampled = GridFunction::sample(spec, f.pullback(sigma));
  CHECK(norm(grid_pulled - sampled) / norm(f) < 1e-8);
}

TEST_CASE("random test functions") {
  const L2Function a = random_test_function(0, TestFunctionKind::smooth);
  CHECK(norm(a) > 0.0);
  CHECK(norm(a - random_test_function(0, TestFunctionKind::smooth)) == 0.0);
  CHECK(random_test_function(1, TestFunctionKind::rough).analytic().has_indicator());

  GridSpec spec;
  const L2Function g = random_test_function(0, TestFunctionKind::smooth, spec);
  CHECK(g.is_grid());
  CHECK(g.grid().support_radius() <= spec.v_window / spec.margin_factor);

  GridSpec plane;
  plane.config = TorusConfig::uniform(2);
  plane.n_q = 8;
  plane.n_v = 33;
  const L2Function h = random_test_function(3, TestFunctionKind::rough, plane);
  CHECK(h.dimension() == 2);
  CHECK(norm(h) > 0.0);
}

TEST_CASE("Cauchy-Schwarz on mixed pairs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const L2Function f = random_test_function(seed, TestFunctionKind::smooth);
    const L2Function g = random_test_function(seed + 50, TestFunctionKind::rough);
    CHECK(std::abs(inner(f, g)) <= norm(f) * norm(g) * (1 + 1e-12));
  }
}
