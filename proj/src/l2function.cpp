#include "prequant/l2function.hpp"

#include "prequant/errors.hpp"

namespace prequant {

namespace {

template <class Op>
auto binary(const L2Function& lhs, const L2Function& rhs, Op op) {
  if (lhs.is_analytic() && rhs.is_analytic()) return op(lhs.analytic(), rhs.analytic());
  if (lhs.is_grid() && rhs.is_grid()) return op(lhs.grid(), rhs.grid());
  throw BackendMismatchError("cannot combine " + lhs.backend_name() + " and " +
                             rhs.backend_name() + " functions");
}

}  // namespace

L2Function L2Function::pullback(const AffineElement& sigma) const {
  return std::visit([&](const auto& f) { return L2Function(f.pullback(sigma)); }, data_);
}

L2Function L2Function::scaled(std::complex<double> factor) const {
  return std::visit([&](const auto& f) { return L2Function(f.scaled(factor)); }, data_);
}

L2Function operator+(const L2Function& lhs, const L2Function& rhs) {
  return binary(lhs, rhs, [](const auto& f, const auto& g) { return L2Function(f + g); });
}

L2Function operator-(const L2Function& lhs, const L2Function& rhs) {
  return binary(lhs, rhs, [](const auto& f, const auto& g) { return L2Function(f - g); });
}

std::complex<double> inner(const L2Function& f, const L2Function& g) {
  return binary(f, g, [](const auto& x, const auto& y) { return inner(x, y); });
}

double norm(const L2Function& f) {
  return f.is_analytic() ? norm(f.analytic()) : norm(f.grid());
}

L2Function random_test_function(std::uint64_t seed, TestFunctionKind kind) {
  return random_analytic_function(seed, kind);
}

L2Function random_test_function(std::uint64_t seed, TestFunctionKind kind, const GridSpec& spec) {
  spec.validate();
  const int m = spec.m();
  // Rates >= 2 keep Gaussian profiles below 1e-13 outside |v| = 3.9, inside the
  // default window / margin = 4.
  auto factor = [&](int axis, std::uint64_t salt, TestFunctionKind factor_kind) {
    RandomFunctionOptions options;
    options.period = spec.config.periods[axis];
    options.min_gauss_rate = 2.0;
    options.max_gauss_rate = 4.0;
    return random_analytic_function(seed * 1000003ULL + salt * 101ULL + axis, factor_kind,
                                    options);
  };
  if (m == 1) {
    return GridFunction::sample(spec, factor(0, 0, kind));
  }
  std::vector<std::vector<AnalyticFunction>> products;
  for (std::uint64_t term = 0; term < 2; ++term) {
    std::vector<AnalyticFunction> factors;
    for (int j = 0; j < m; ++j) {
      const bool rough_factor = kind == TestFunctionKind::rough && term == 0 && j == 0;
      factors.push_back(factor(j, term, rough_factor ? kind : TestFunctionKind::smooth));
    }
    products.push_back(std::move(factors));
  }
  return GridFunction::sample(spec, [&](std::span<const double> q, std::span<const double> v) {
    std::complex<double> total = 0.0;
    for (const auto& factors : products) {
      std::complex<double> product = 1.0;
      for (int j = 0; j < m; ++j) product *= factors[j](q[j], v[j]);
      total += product;
    }
    return total;
  });
}

}  // namespace prequant
