#include "prequant/affine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prequant {

AffineElement::AffineElement(double a, double b) : a_(a), b_(b) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > 0.0)) {
    throw std::invalid_argument("affine element requires finite a and b > 0, got b = " +
                                std::to_string(b));
  }
}

UpperHalfPlanePoint::UpperHalfPlanePoint(double re, double im) : re_(re), im_(im) {
  if (!std::isfinite(re) || !std::isfinite(im) || !(im > 0.0)) {
    throw std::invalid_argument("upper half-plane point requires Im s > 0, got " +
                                std::to_string(im));
  }
}

AffineElement compose(const AffineElement& first, const AffineElement& second) {
  return {first.a() + first.b() * second.a(), first.b() * second.b()};
}

AffineElement invert(const AffineElement& sigma) {
  return {-sigma.a() / sigma.b(), 1.0 / sigma.b()};
}

AffineElement sigma_s(const UpperHalfPlanePoint& s) { return {s.re(), s.im()}; }

AffineElement alpha(double u) { return {u, 1.0}; }

AffineElement beta(double u) { return {0.0, std::exp(u)}; }

}  // namespace prequant
