#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "prequant/affine.hpp"
#include "prequant/analytic_function.hpp"
#include "prequant/phasespace.hpp"

namespace prequant {

/// Discretization of (R^m / lattice) x [-V, V]^m: n_q periodic nodes per q-axis,
/// n_v nodes per v-axis including both window endpoints.
struct GridSpec {
  TorusConfig config;
  int n_q = 64;
  double v_window = 8.0;
  int n_v = 1025;
  // Functions are expected to vanish for |v_j| > v_window / margin_factor.
  double margin_factor = 2.0;

  void validate() const;

  int m() const { return config.m; }
  std::size_t size() const;
  double q_spacing(int axis) const { return config.periods[axis] / n_q; }
  double v_spacing() const { return 2.0 * v_window / (n_v - 1); }
  double q_node(int axis, int index) const { return index * q_spacing(axis); }
  double v_node(int index) const { return -v_window + index * v_spacing(); }

  /// Tensor-product weights: uniform in q, trapezoid in v.
  std::vector<double> quadrature_weights() const;
  double total_volume() const;

  friend bool operator==(const GridSpec& x, const GridSpec& y) {
    return x.config.periods == y.config.periods && x.n_q == y.n_q && x.v_window == y.v_window &&
           x.n_v == y.n_v && x.margin_factor == y.margin_factor;
  }
};

/// Node values of a function on a GridSpec. Flat storage is row-major over the axes
/// (q_1, ..., q_m, v_1, ..., v_m).
class GridFunction {
 public:
  using Value = std::complex<double>;
  using PointFunction = std::function<Value(std::span<const double> q, std::span<const double> v)>;

  GridFunction(GridSpec spec, std::vector<Value> values);

  static GridFunction sample(const GridSpec& spec, const PointFunction& f);
  /// Samples a one-dimensional analytic function; requires m = 1 and a matching period.
  static GridFunction sample(const GridSpec& spec, const AnalyticFunction& f);
  static GridFunction zero(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  std::span<const Value> values() const { return values_; }

  /// Largest |v_j| over nodes where |f| exceeds rel_tol * max |f|; 0 for the zero function.
  double support_radius(double rel_tol = 1e-13) const;

  /// f o A_sigma. Throws SupportMarginError if the pulled-back support leaves the window.
  GridFunction pullback(const AffineElement& sigma) const;
  GridFunction scaled(Value factor) const;

  /// Spectral d/dq_axis.
  GridFunction derivative_q(int axis) const;
  /// Fourth-order centered d/dv_axis; the function is taken to be zero outside the window.
  GridFunction derivative_v(int axis) const;

  /// Pointwise map (q, v, value) -> new value.
  GridFunction transformed(
      const std::function<Value(std::span<const double>, std::span<const double>, Value)>& map)
      const;

  friend GridFunction operator+(const GridFunction& lhs, const GridFunction& rhs);
  friend GridFunction operator-(const GridFunction& lhs, const GridFunction& rhs);

  /// CSV snapshot: header "q1,...,qm,v1,...,vm,re,im", one row per node in storage order.
  void write_csv(std::ostream& out) const;
  /// Binary snapshot: magic "PQGF", int32 m, n_q, n_v, float64 v_window, m float64 periods,
  /// then interleaved float64 (re, im) per node in storage order. Little-endian host layout.
  void write_binary(std::ostream& out) const;

 private:
  GridSpec spec_;
  std::vector<Value> values_;
};

std::complex<double> inner(const GridFunction& f, const GridFunction& g);
double norm(const GridFunction& f);

}  // namespace prequant
