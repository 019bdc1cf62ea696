#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <variant>

#include "prequant/analytic_function.hpp"
#include "prequant/grid_function.hpp"

namespace prequant {

/// An element of L^2(N, Liouville) held by one of the two backends.
/// Binary operations require both operands on the same backend (and grid).
class L2Function {
 public:
  L2Function(AnalyticFunction f) : data_(std::move(f)) {}  // NOLINT(google-explicit-constructor)
  L2Function(GridFunction f) : data_(std::move(f)) {}      // NOLINT(google-explicit-constructor)

  bool is_analytic() const { return std::holds_alternative<AnalyticFunction>(data_); }
  bool is_grid() const { return std::holds_alternative<GridFunction>(data_); }
  const AnalyticFunction& analytic() const { return std::get<AnalyticFunction>(data_); }
  const GridFunction& grid() const { return std::get<GridFunction>(data_); }

  std::string backend_name() const { return is_analytic() ? "analytic" : "grid"; }
  int dimension() const { return is_analytic() ? 1 : grid().spec().m(); }

  L2Function pullback(const AffineElement& sigma) const;
  L2Function scaled(std::complex<double> factor) const;

  friend L2Function operator+(const L2Function& lhs, const L2Function& rhs);
  friend L2Function operator-(const L2Function& lhs, const L2Function& rhs);
  friend std::complex<double> inner(const L2Function& f, const L2Function& g);

 private:
  std::variant<AnalyticFunction, GridFunction> data_;
};

double norm(const L2Function& f);

/// Seeded oracle function on the analytic backend (m = 1, period 2 pi).
L2Function random_test_function(std::uint64_t seed, TestFunctionKind kind);
/// Seeded oracle function sampled onto a grid. Profiles are narrow enough to respect
/// the default support margin.
L2Function random_test_function(std::uint64_t seed, TestFunctionKind kind, const GridSpec& spec);

}  // namespace prequant
