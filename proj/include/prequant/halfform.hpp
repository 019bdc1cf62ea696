#pragma once

#include <complex>
#include <span>
#include <vector>

#include "prequant/affine.hpp"

namespace prequant {

/// Constant-coefficient complex one-form on R^{2m}, components on (dq_1, dv_1, ..., dq_m, dv_m).
using OneForm = std::vector<std::complex<double>>;

/// Coefficient of forms[0] ^ ... ^ forms[n-1] against dq_1 ^ dv_1 ^ ... ^ dq_m ^ dv_m,
/// by the signed permutation sum. Requires n = 2m forms, each of length 2m.
std::complex<double> top_coefficient(std::span<const OneForm> forms);

/// dz_{s,j} = dq_j + s dv_j.
OneForm adapted_one_form(const UpperHalfPlanePoint& s, int j, int m);

inline constexpr int kMaxBruteForceDimension = 3;

/// i^{m^2} Theta_s ^ conj(Theta_s) / (positive orientation form), brute force, 1 <= m <= 3.
std::complex<double> wedge_density_complex(const UpperHalfPlanePoint& s, int m);

/// h_s(Theta_s, Theta_s). Brute force for 1 <= m <= 3, otherwise std::out_of_range.
double wedge_density(const UpperHalfPlanePoint& s, int m);
/// (2 Im s)^m; valid for every m.
double wedge_density_closed_form(const UpperHalfPlanePoint& s, int m);

/// |h_s(Theta_s, Theta_s) - (Im s)^m h(Theta, Theta)|, both sides by brute force.
double prop32_residual(const UpperHalfPlanePoint& s, int m);

/// Half-form weight h_{kappa_s}(theta_s, theta_s); constant on the flat models.
struct HalfFormWeight {
  UpperHalfPlanePoint s;
  int m;
  double value;
};

HalfFormWeight halfform_weight(const UpperHalfPlanePoint& s, int m);

}  // namespace prequant
