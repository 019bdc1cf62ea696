#include "prequant/field.hpp"

#include <cmath>
#include <stdexcept>

#include "prequant/halfform.hpp"
#include "prequant/rho.hpp"

namespace prequant {

namespace {

// h(Theta, Theta) at s = i; constant on the flat models.
double reference_density(int m) { return wedge_density_closed_form({0.0, 1.0}, m); }

}  // namespace

double fiber_norm(const FieldElement& psi) {
  const double weight = halfform_weight(psi.s, psi.coefficient.dimension()).value;
  return std::sqrt(weight) * norm(psi.coefficient);
}

FiberNormIdentity fiber_norm_identity(const FieldElement& psi) {
  const int m = psi.coefficient.dimension();
  const double direct = std::pow(fiber_norm(psi), 2);
  const L2Function moved = psi.coefficient.pullback(invert(sigma_s(psi.s)));
  const double rhs = std::pow(psi.s.im(), -0.5 * m) * std::sqrt(reference_density(m)) *
                     std::pow(norm(moved), 2);
  const double scale = std::max(std::abs(direct), std::abs(rhs));
  return {direct, rhs, scale == 0.0 ? 0.0 : std::abs(direct - rhs) / scale};
}

FieldElement triv_A(const UpperHalfPlanePoint& s, const L2Function& f) {
  const double weight = halfform_weight(s, f.dimension()).value;
  return {s, f.scaled(1.0 / std::sqrt(weight))};
}

ChartValue triv_B(const FieldElement& psi) {
  const int m = psi.coefficient.dimension();
  const double factor = std::pow(psi.s.im(), -0.25 * m) * std::pow(reference_density(m), 0.25);
  return {psi.s, psi.coefficient.pullback(invert(sigma_s(psi.s))).scaled(factor)};
}

FieldElement triv_B_inverse(const UpperHalfPlanePoint& s, const L2Function& f) {
  const int m = f.dimension();
  const double factor = std::pow(s.im(), 0.25 * m) * std::pow(reference_density(m), -0.25);
  return {s, f.pullback(sigma_s(s)).scaled(factor)};
}

L2Function transition(const UpperHalfPlanePoint& s, const L2Function& f) {
  return apply_rho(invert(sigma_s(s)), f);
}

FieldElement TrivializedSection::at(const UpperHalfPlanePoint& s) const {
  return chart == Chart::A ? triv_A(s, function) : triv_B_inverse(s, function);
}

std::vector<FieldElement> TrivializedSection::evaluate() const {
  std::vector<FieldElement> values;
  values.reserve(samples.size());
  for (const auto& s : samples) values.push_back(at(s));
  return values;
}

std::vector<QuotientSample> section_smoothness_probe(const L2Function& f,
                                                     const UpperHalfPlanePoint& s0,
                                                     ParameterDirection direction,
                                                     std::span<const double> u_values) {
  const L2Function base = transition(s0, f);
  std::vector<QuotientSample> samples;
  samples.reserve(u_values.size());
  for (double u : u_values) {
    if (u == 0.0) throw std::invalid_argument("smoothness probe needs u != 0");
    const UpperHalfPlanePoint s = direction == ParameterDirection::re
                                      ? UpperHalfPlanePoint(s0.re() + u, s0.im())
                                      : UpperHalfPlanePoint(s0.re(), s0.im() + u);
    samples.push_back({u, norm(transition(s, f) - base) / std::abs(u)});
  }
  return samples;
}

}  // namespace prequant
