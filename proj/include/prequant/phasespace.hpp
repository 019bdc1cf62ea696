#pragma once

#include <complex>
#include <vector>

#include "prequant/affine.hpp"

namespace prequant {

/// Flat torus M = R^m / (L_1 Z x ... x L_m Z).
struct TorusConfig {
  int m = 1;
  std::vector<double> periods{6.283185307179586};

  /// Throws std::invalid_argument on m < 1, a period count != m, or a non-positive period.
  void validate() const;

  static TorusConfig circle(double period = 6.283185307179586) { return {1, {period}}; }
  static TorusConfig uniform(int m, double period = 6.283185307179586) {
    return {m, std::vector<double>(static_cast<std::size_t>(m), period)};
  }
};

// Reduces x into [0, period) with a floor-based remainder.
double reduce_periodic(double x, double period);

/// The geodesic t -> q + v t, with q reduced into the fundamental domain.
struct PhasePoint {
  std::vector<double> q;
  std::vector<double> v;

  PhasePoint(const TorusConfig& config, std::vector<double> q, std::vector<double> v);

  int dimension() const { return static_cast<int>(q.size()); }
};

/// x o sigma, i.e. (q + a v mod L, b v).
PhasePoint act(const TorusConfig& config, const AffineElement& sigma, const PhasePoint& x);

/// J(s)-holomorphic coordinates z_j = q_j + s v_j.
std::vector<std::complex<double>> adapted_coordinate(const UpperHalfPlanePoint& s,
                                                     const PhasePoint& x);

struct TangentVector {
  std::vector<double> dq;
  std::vector<double> dv;
};

/// Generators of the translation (geodesic flow) and dilation (Euler) actions.
struct FlowFields {
  TangentVector geodesic;
  TangentVector euler;
};

FlowFields flow_fields(const PhasePoint& x);

struct ScalingCheck {
  double omega_residual;     // max |J^T omega J - chi * omega| entrywise
  double jacobian_determinant;
};

/// Pullback of omega = sum dv_j ^ dq_j and of the Liouville density under x -> x o sigma.
ScalingCheck pullback_scaling_check(const AffineElement& sigma, int m);

/// Cauchy-Riemann residual of (a, b) -> z_i(x o (a, b)) at sigma, by central differences.
/// Returns max_j |dF_j/db - i dF_j/da|.
double cr_residual(const TorusConfig& config, const PhasePoint& x, const AffineElement& sigma,
                   double step = 1e-3);

}  // namespace prequant
