#pragma once

#include <complex>

namespace prequant {

/// Element t -> a + b t of the orientation preserving affine group (b > 0).
class AffineElement {
 public:
  /// Throws std::invalid_argument unless b > 0 and both entries are finite.
  AffineElement(double a, double b);

  static AffineElement identity() { return {0.0, 1.0}; }

  double a() const { return a_; }
  double b() const { return b_; }

  double apply(double t) const { return a_ + b_ * t; }
  std::complex<double> apply(std::complex<double> t) const { return a_ + b_ * t; }

  friend bool operator==(const AffineElement&, const AffineElement&) = default;

 private:
  double a_;
  double b_;
};

/// Point of the upper half-plane, Im > 0.
class UpperHalfPlanePoint {
 public:
  UpperHalfPlanePoint(double re, double im);
  explicit UpperHalfPlanePoint(std::complex<double> s) : UpperHalfPlanePoint(s.real(), s.imag()) {}

  double re() const { return re_; }
  double im() const { return im_; }
  std::complex<double> value() const { return {re_, im_}; }

  friend bool operator==(const UpperHalfPlanePoint&, const UpperHalfPlanePoint&) = default;

 private:
  double re_;
  double im_;
};

// (first * second)(t) = first(second(t)). With this order the right action
// x -> x o sigma satisfies A_{first*second} = A_second o A_first.
AffineElement compose(const AffineElement& first, const AffineElement& second);
AffineElement invert(const AffineElement& sigma);

/// The character sigma -> b.
inline double chi(const AffineElement& sigma) { return sigma.b(); }

/// The unique element mapping i to s.
AffineElement sigma_s(const UpperHalfPlanePoint& s);

/// One-parameter subgroups: translations t -> u + t and dilations t -> e^u t.
AffineElement alpha(double u);
AffineElement beta(double u);

}  // namespace prequant
