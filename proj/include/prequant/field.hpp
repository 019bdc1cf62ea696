#pragma once

#include <span>
#include <vector>

#include "prequant/affine.hpp"
#include "prequant/l2function.hpp"

namespace prequant {

/// Vector psi_s = f_s theta ⊗ theta_s of the fiber over s; stored by its coefficient f_s.
struct FieldElement {
  UpperHalfPlanePoint s;
  L2Function coefficient;
};

/// sqrt of the integral of |f_s|^2 h_{kappa_s}(theta_s, theta_s) against the Liouville density.
double fiber_norm(const FieldElement& psi);

/// Both sides of the change-of-variables form of the fiber norm:
/// ||psi||^2 = (Im s)^{-m/2} * integral of (|f_s|^2 o A_{sigma_s}^{-1}) sqrt(h(Theta, Theta)).
struct FiberNormIdentity {
  double direct;            // fiber_norm(psi)^2
  double change_of_variables;
  double relative_residual;
};
FiberNormIdentity fiber_norm_identity(const FieldElement& psi);

/// Chart A: (s, f) -> f / sqrt(h_{kappa_s}(theta_s, theta_s)) theta ⊗ theta_s.
FieldElement triv_A(const UpperHalfPlanePoint& s, const L2Function& f);

struct ChartValue {
  UpperHalfPlanePoint s;
  L2Function function;
};

/// Chart B: psi_s -> (s, (Im s)^{-m/4} (f_s o A_{sigma_s}^{-1}) h(Theta, Theta)^{1/4}).
ChartValue triv_B(const FieldElement& psi);
/// Inverse of chart B on the fiber over s.
FieldElement triv_B_inverse(const UpperHalfPlanePoint& s, const L2Function& f);

/// B o A on the fiber over s; equals rho(sigma_s^{-1}) f.
L2Function transition(const UpperHalfPlanePoint& s, const L2Function& f);

/// Section of the field given by a constant function in one chart, sampled at finitely many s.
struct TrivializedSection {
  enum class Chart { A, B };
  Chart chart;
  L2Function function;
  std::vector<UpperHalfPlanePoint> samples;

  FieldElement at(const UpperHalfPlanePoint& s) const;
  std::vector<FieldElement> evaluate() const;
};

enum class ParameterDirection { re, im };

struct QuotientSample {
  double u;
  double quotient;
};

/// ||transition(s0 + u dir, f) - transition(s0, f)|| / |u| for each u: the difference
/// quotient of the chart-A-constant section read in chart B.
std::vector<QuotientSample> section_smoothness_probe(const L2Function& f,
                                                     const UpperHalfPlanePoint& s0,
                                                     ParameterDirection direction,
                                                     std::span<const double> u_values);

}  // namespace prequant
