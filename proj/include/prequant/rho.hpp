#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "prequant/affine.hpp"
#include "prequant/l2function.hpp"

namespace prequant {

/// rho(sigma) f = chi(sigma)^{m/2} f o A_sigma, unitary on L^2(N, Liouville).
L2Function apply_rho(const AffineElement& sigma, const L2Function& f);

/// | ||rho(sigma) f|| - ||f|| |
double unitarity_defect(const AffineElement& sigma, const L2Function& f);

struct ContinuitySample {
  double radius;
  double max_deviation;
};

/// For each radius r, the max over `samples` points sigma' on the circle of radius r
/// around sigma0 in (a, b) coordinates of ||rho(sigma') f - rho(sigma0) f||.
/// Radii must be positive, strictly decreasing and smaller than b(sigma0).
std::vector<ContinuitySample> continuity_probe(const AffineElement& sigma0, const L2Function& f,
                                               std::span<const double> radii, int samples = 16);

/// A curve u -> sigma(u) through the group.
class CurveInGroup {
 public:
  enum class Kind { alpha, beta, segment, custom };

  static CurveInGroup alpha();
  static CurveInGroup beta();
  /// Straight line in (a, b) coordinates, u in [0, 1].
  static CurveInGroup segment(const AffineElement& from, const AffineElement& to);
  static CurveInGroup custom(std::string name, std::function<AffineElement(double)> curve);

  AffineElement operator()(double u) const { return curve_(u); }
  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

 private:
  CurveInGroup(Kind kind, std::string name, std::function<AffineElement(double)> curve)
      : kind_(kind), name_(std::move(name)), curve_(std::move(curve)) {}

  Kind kind_;
  std::string name_;
  std::function<AffineElement(double)> curve_;
};

/// ||rho(c(u)) f - rho(c(0)) f|| / |u|; the two-sided variant uses c(u) and c(-u) over 2|u|.
double difference_quotient(const CurveInGroup& curve, const L2Function& f, double u,
                           bool two_sided = false);

/// The would-be derivative of u -> rho(c(u)) f at 0 for a smooth analytic f:
/// X f along alpha, (m/2) f + Y f along beta.
AnalyticFunction rho_generator(CurveInGroup::Kind direction, const AnalyticFunction& f);

/// || (rho(c(u)) f - f) / u - D f || with D from rho_generator. Throws std::invalid_argument
/// for grid functions, curves other than alpha/beta, and rough (indicator) functions.
double derivative_residual(const CurveInGroup& curve, const L2Function& f, double u);

}  // namespace prequant
