#pragma once

#include <complex>
#include <map>
#include <vector>

#include "prequant/grid_function.hpp"

namespace prequant {

/// Real polynomial in the phase-space coordinates. Variables are indexed
/// q_1..q_m as 0..m-1 and v_1..v_m as m..2m-1.
class Polynomial {
 public:
  using Exponents = std::vector<int>;

  explicit Polynomial(int variables = 0) : variables_(variables) {}
  static Polynomial constant(int variables, double c);
  static Polynomial variable(int variables, int index, double c = 1.0);

  int variables() const { return variables_; }
  const std::map<Exponents, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Largest absolute coefficient.
  double max_coefficient() const;

  Polynomial derivative(int index) const;
  double operator()(std::span<const double> point) const;

  Polynomial& operator+=(const Polynomial& other);
  friend Polynomial operator+(Polynomial lhs, const Polynomial& rhs) { return lhs += rhs; }
  friend Polynomial operator-(Polynomial lhs, const Polynomial& rhs);
  friend Polynomial operator*(double c, Polynomial p);

 private:
  void add_term(const Exponents& exponents, double c);

  int variables_;
  std::map<Exponents, double> terms_;
};

/// Real one-form sum_k a_k dx^k with polynomial coefficients, in the variable order above.
struct ConnectionPotential {
  int m = 1;
  std::vector<Polynomial> coefficients;

  /// a = -sum_j v_j dq_j, so that da = -omega for omega = sum_j dv_j ^ dq_j.
  static ConnectionPotential standard(int m);
};

using TwoForm = std::vector<std::vector<Polynomial>>;

TwoForm exterior_derivative(const ConnectionPotential& a);
/// omega(d/dx_i, d/dx_j) as constant polynomials.
TwoForm symplectic_form(int m);

/// Max coefficient of da + omega; zero exactly for the standard potential.
double potential_residual(const ConnectionPotential& a);
/// Max coefficient of R + i omega with R(d_i, d_j) = i (d_i a_j - d_j a_i), on coordinate fields.
double symbolic_curvature_residual(const ConnectionPotential& a);

/// Vector field sum of coefficient * v^powers * d/dq_index or d/dv_index.
struct VectorField {
  enum class Direction { q, v };
  struct Term {
    Direction direction;
    int index;
    double coefficient = 1.0;
    std::vector<int> v_powers;  // empty means constant
  };
  int m = 1;
  std::vector<Term> terms;

  static VectorField coordinate_q(int m, int index);
  static VectorField coordinate_v(int m, int index);
  /// Geodesic flow field sum_j v_j d/dq_j.
  static VectorField geodesic(int m);
  /// Euler field sum_j v_j d/dv_j.
  static VectorField euler(int m);
};

/// zeta f, without the connection term.
GridFunction apply_field(const VectorField& zeta, const GridFunction& f);

/// (zeta f + i a(zeta) f): q-derivatives spectral, v-derivatives fourth-order centered.
/// With check_support, throws SupportMarginError when f does not vanish within two cells
/// of the v-window boundary.
GridFunction covariant_derivative(const VectorField& zeta, const GridFunction& f,
                                  const ConnectionPotential& a, bool check_support = true);
GridFunction covariant_derivative(const VectorField& zeta, const GridFunction& f);

/// ||R(d/dq_1, d/dv_1) f + i omega(d/dq_1, d/dv_1) f|| / ||f||.
double curvature_residual(const GridFunction& f, const ConnectionPotential& a);
double curvature_residual(const GridFunction& f);

}  // namespace prequant
