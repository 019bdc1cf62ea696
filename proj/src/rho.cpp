#include "prequant/rho.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prequant {

L2Function apply_rho(const AffineElement& sigma, const L2Function& f) {
  const double m = f.dimension();
  return f.pullback(sigma).scaled(std::pow(chi(sigma), 0.5 * m));
}

double unitarity_defect(const AffineElement& sigma, const L2Function& f) {
  return std::abs(norm(apply_rho(sigma, f)) - norm(f));
}

std::vector<ContinuitySample> continuity_probe(const AffineElement& sigma0, const L2Function& f,
                                               std::span<const double> radii, int samples) {
  if (samples < 1) throw std::invalid_argument("continuity probe needs at least one sample");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !(radii[i] < sigma0.b())) {
      throw std::invalid_argument("continuity radii must lie in (0, b)");
    }
    if (i > 0 && !(radii[i] < radii[i - 1])) {
      throw std::invalid_argument("continuity radii must be strictly decreasing");
    }
  }
  const L2Function reference = apply_rho(sigma0, f);
  std::vector<ContinuitySample> result;
  for (double radius : radii) {
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double angle = 2.0 * M_PI * k / samples;
      const AffineElement nearby(sigma0.a() + radius * std::cos(angle),
                                 sigma0.b() + radius * std::sin(angle));
      worst = std::max(worst, norm(apply_rho(nearby, f) - reference));
    }
    result.push_back({radius, worst});
  }
  return result;
}

CurveInGroup CurveInGroup::alpha() {
  return {Kind::alpha, "alpha", [](double u) { return prequant::alpha(u); }};
}

CurveInGroup CurveInGroup::beta() {
  return {Kind::beta, "beta", [](double u) { return prequant::beta(u); }};
}

CurveInGroup CurveInGroup::segment(const AffineElement& from, const AffineElement& to) {
  return {Kind::segment, "segment", [from, to](double u) {
            return AffineElement(from.a() + u * (to.a() - from.a()),
                                 from.b() + u * (to.b() - from.b()));
          }};
}

CurveInGroup CurveInGroup::custom(std::string name, std::function<AffineElement(double)> curve) {
  return {Kind::custom, std::move(name), std::move(curve)};
}

double difference_quotient(const CurveInGroup& curve, const L2Function& f, double u,
                           bool two_sided) {
  if (u == 0.0) throw std::invalid_argument("difference quotient needs u != 0");
  if (two_sided) {
    return norm(apply_rho(curve(u), f) - apply_rho(curve(-u), f)) / (2.0 * std::abs(u));
  }
  return norm(apply_rho(curve(u), f) - apply_rho(curve(0.0), f)) / std::abs(u);
}

AnalyticFunction rho_generator(CurveInGroup::Kind direction, const AnalyticFunction& f) {
  if (f.has_indicator()) {
    throw std::invalid_argument("rough functions have no derivative along the action");
  }
  switch (direction) {
    case CurveInGroup::Kind::alpha:
      return f.geodesic_derivative();
    case CurveInGroup::Kind::beta:
      return f.scaled(0.5) + f.euler_derivative();  // m = 1
    default:
      throw std::invalid_argument("generator defined only along alpha and beta");
  }
}

double derivative_residual(const CurveInGroup& curve, const L2Function& f, double u) {
  if (!f.is_analytic()) {
    throw std::invalid_argument("derivative residual needs an analytic oracle function");
  }
  if (u == 0.0) throw std::invalid_argument("derivative residual needs u != 0");
  const AnalyticFunction generator = rho_generator(curve.kind(), f.analytic());
  const L2Function quotient = (apply_rho(curve(u), f) - f).scaled(1.0 / u);
  return norm(quotient - L2Function(generator));
}

}  // namespace prequant
