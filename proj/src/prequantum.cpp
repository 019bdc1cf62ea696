#include "prequant/prequantum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prequant/errors.hpp"

namespace prequant {

Polynomial Polynomial::constant(int variables, double c) {
  Polynomial p(variables);
  p.add_term(Exponents(static_cast<std::size_t>(variables), 0), c);
  return p;
}

Polynomial Polynomial::variable(int variables, int index, double c) {
  Polynomial p(variables);
  Exponents e(static_cast<std::size_t>(variables), 0);
  e.at(static_cast<std::size_t>(index)) = 1;
  p.add_term(e, c);
  return p;
}

void Polynomial::add_term(const Exponents& exponents, double c) {
  if (c == 0.0) return;
  const double sum = (terms_[exponents] += c);
  if (sum == 0.0) terms_.erase(exponents);
}

double Polynomial::max_coefficient() const {
  double worst = 0.0;
  for (const auto& [e, c] : terms_) worst = std::max(worst, std::abs(c));
  return worst;
}

Polynomial Polynomial::derivative(int index) const {
  Polynomial result(variables_);
  for (const auto& [e, c] : terms_) {
    const int power = e.at(static_cast<std::size_t>(index));
    if (power == 0) continue;
    Exponents lowered = e;
    lowered[index] -= 1;
    result.add_term(lowered, c * power);
  }
  return result;
}

double Polynomial::operator()(std::span<const double> point) const {
  double total = 0.0;
  for (const auto& [e, c] : terms_) {
    double term = c;
    for (std::size_t k = 0; k < e.size(); ++k) term *= std::pow(point[k], e[k]);
    total += term;
  }
  return total;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (variables_ == 0) variables_ = other.variables_;
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Polynomial operator-(Polynomial lhs, const Polynomial& rhs) { return lhs += -1.0 * rhs; }

Polynomial operator*(double c, Polynomial p) {
  Polynomial result(p.variables_);
  for (const auto& [e, coef] : p.terms_) result.add_term(e, c * coef);
  return result;
}

ConnectionPotential ConnectionPotential::standard(int m) {
  ConnectionPotential a{m, std::vector<Polynomial>(static_cast<std::size_t>(2 * m),
                                                   Polynomial(2 * m))};
  for (int j = 0; j < m; ++j) a.coefficients[j] = Polynomial::variable(2 * m, m + j, -1.0);
  return a;
}

TwoForm exterior_derivative(const ConnectionPotential& a) {
  const int n = 2 * a.m;
  TwoForm d(n, std::vector<Polynomial>(n, Polynomial(n)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d[i][j] = a.coefficients[j].derivative(i) - a.coefficients[i].derivative(j);
    }
  }
  return d;
}

TwoForm symplectic_form(int m) {
  const int n = 2 * m;
  TwoForm omega(n, std::vector<Polynomial>(n, Polynomial(n)));
  for (int j = 0; j < m; ++j) {
    omega[j][m + j] = Polynomial::constant(n, -1.0);  // (dv ^ dq)(d_q, d_v)
    omega[m + j][j] = Polynomial::constant(n, 1.0);
  }
  return omega;
}

double potential_residual(const ConnectionPotential& a) {
  const TwoForm da = exterior_derivative(a);
  const TwoForm omega = symplectic_form(a.m);
  double worst = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    for (std::size_t j = 0; j < da.size(); ++j) {
      worst = std::max(worst, (da[i][j] + omega[i][j]).max_coefficient());
    }
  }
  return worst;
}

double symbolic_curvature_residual(const ConnectionPotential& a) {
  // Coordinate fields commute, so R(d_i, d_j) = d_i(i a_j) - d_j(i a_i) = i (da)_ij.
  // R + i omega = i (da + omega); the factor i has modulus one.
  const TwoForm da = exterior_derivative(a);
  const TwoForm omega = symplectic_form(a.m);
  double worst = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    for (std::size_t j = 0; j < da.size(); ++j) {
      const Polynomial curvature = a.coefficients[j].derivative(static_cast<int>(i)) -
                                   a.coefficients[i].derivative(static_cast<int>(j));
      worst = std::max(worst, (curvature + omega[i][j]).max_coefficient());
    }
  }
  return worst;
}

VectorField VectorField::coordinate_q(int m, int index) {
  return {m, {{Direction::q, index, 1.0, {}}}};
}

VectorField VectorField::coordinate_v(int m, int index) {
  return {m, {{Direction::v, index, 1.0, {}}}};
}

VectorField VectorField::geodesic(int m) {
  VectorField field{m, {}};
  for (int j = 0; j < m; ++j) {
    std::vector<int> powers(static_cast<std::size_t>(m), 0);
    powers[j] = 1;
    field.terms.push_back({Direction::q, j, 1.0, powers});
  }
  return field;
}

VectorField VectorField::euler(int m) {
  VectorField field{m, {}};
  for (int j = 0; j < m; ++j) {
    std::vector<int> powers(static_cast<std::size_t>(m), 0);
    powers[j] = 1;
    field.terms.push_back({Direction::v, j, 1.0, powers});
  }
  return field;
}

namespace {

double v_monomial(const std::vector<int>& powers, std::span<const double> v) {
  double value = 1.0;
  for (std::size_t j = 0; j < powers.size(); ++j) value *= std::pow(v[j], powers[j]);
  return value;
}

}  // namespace

GridFunction apply_field(const VectorField& zeta, const GridFunction& f) {
  if (zeta.m != f.spec().m()) throw std::invalid_argument("vector field dimension mismatch");
  GridFunction result = GridFunction::zero(f.spec());
  for (const auto& term : zeta.terms) {
    const GridFunction partial =
        term.direction == VectorField::Direction::q ? f.derivative_q(term.index)
                                                    : f.derivative_v(term.index);
    result = result + partial.transformed(
                          [&term](std::span<const double>, std::span<const double> v,
                                  std::complex<double> x) {
                            return term.coefficient * v_monomial(term.v_powers, v) * x;
                          });
  }
  return result;
}

GridFunction covariant_derivative(const VectorField& zeta, const GridFunction& f,
                                  const ConnectionPotential& a, bool check_support) {
  const GridSpec& spec = f.spec();
  const int m = spec.m();
  if (zeta.m != m || a.m != m) {
    throw std::invalid_argument("vector field, potential and grid dimensions differ");
  }
  if (check_support) {
    const double edge = spec.v_window - 2.0 * spec.v_spacing();
    if (f.support_radius(1e-12) > edge) {
      throw SupportMarginError("function does not vanish near the v-window boundary");
    }
  }

  const GridFunction result = apply_field(zeta, f);
  // Potential term i a(zeta) f.
  std::vector<double> point(static_cast<std::size_t>(2 * m));
  const GridFunction potential_term = f.transformed(
      [&](std::span<const double> q, std::span<const double> v, std::complex<double> x) {
        std::copy(q.begin(), q.end(), point.begin());
        std::copy(v.begin(), v.end(), point.begin() + m);
        double contraction = 0.0;
        for (const auto& term : zeta.terms) {
          const int k = term.direction == VectorField::Direction::q ? term.index : m + term.index;
          contraction += term.coefficient * v_monomial(term.v_powers, v) * a.coefficients[k](point);
        }
        return std::complex<double>(0.0, contraction) * x;
      });
  return result + potential_term;
}

GridFunction covariant_derivative(const VectorField& zeta, const GridFunction& f) {
  return covariant_derivative(zeta, f, ConnectionPotential::standard(f.spec().m()));
}

double curvature_residual(const GridFunction& f, const ConnectionPotential& a) {
  const int m = f.spec().m();
  const VectorField dq = VectorField::coordinate_q(m, 0);
  const VectorField dv = VectorField::coordinate_v(m, 0);
  const GridFunction curvature = covariant_derivative(dq, covariant_derivative(dv, f, a), a) -
                                 covariant_derivative(dv, covariant_derivative(dq, f, a), a);
  const double omega_qv = -1.0;
  const GridFunction residual = curvature + f.scaled({0.0, omega_qv});
  return norm(residual) / norm(f);
}

double curvature_residual(const GridFunction& f) {
  return curvature_residual(f, ConnectionPotential::standard(f.spec().m()));
}

}  // namespace prequant
