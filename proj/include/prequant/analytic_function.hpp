#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "prequant/affine.hpp"

namespace prequant {

inline constexpr double kTwoPi = 6.283185307179586;

/// coefficient * v^power * exp(-gauss_rate v^2) * exp(i osc_rate v) * 1_[lo, hi](v)
struct ProfileTerm {
  std::complex<double> coefficient{1.0, 0.0};
  int power = 0;
  double gauss_rate = 0.0;
  double osc_rate = 0.0;
  std::optional<std::pair<double, double>> indicator;

  std::complex<double> operator()(double v) const;
  bool square_integrable() const { return gauss_rate > 0.0 || indicator.has_value(); }
};

struct FourierMode {
  int k = 0;  // q-dependence exp(2 pi i k q / L)
  std::vector<ProfileTerm> terms;
};

/// Closed-form element of L^2 over the cylinder (R / L Z) x R with density dq dv:
/// a finite sum of Fourier modes in q times profile terms in v. The class is
/// closed under pullback by the affine action, so every quantity built on it is exact.
class AnalyticFunction {
 public:
  explicit AnalyticFunction(double period = kTwoPi);
  AnalyticFunction(double period, int k, std::vector<ProfileTerm> terms);

  AnalyticFunction& add_mode(int k, std::vector<ProfileTerm> terms);

  double period() const { return period_; }
  const std::vector<FourierMode>& modes() const { return modes_; }
  bool has_indicator() const;

  std::complex<double> operator()(double q, double v) const;

  /// f o A_sigma, exact: phi(v) -> exp(2 pi i k a v / L) phi(b v).
  AnalyticFunction pullback(const AffineElement& sigma) const;
  AnalyticFunction scaled(std::complex<double> factor) const;

  /// v d/dq f (geodesic flow field applied to f).
  AnalyticFunction geodesic_derivative() const;
  /// v d/dv f (Euler field applied to f). Throws std::domain_error on indicator terms.
  AnalyticFunction euler_derivative() const;

  friend AnalyticFunction operator+(const AnalyticFunction& lhs, const AnalyticFunction& rhs);
  friend AnalyticFunction operator-(const AnalyticFunction& lhs, const AnalyticFunction& rhs);

 private:
  double period_;
  std::vector<FourierMode> modes_;  // sorted by k, unique
};

// Hermitian inner product, linear in the first argument. Terms are merged on every
// interval between indicator endpoints before integration, so differences of nearly
// equal functions do not lose their leading digits to cancellation.
std::complex<double> inner(const AnalyticFunction& f, const AnalyticFunction& g);
double norm(const AnalyticFunction& f);

/// Integral over [lo, hi] (infinite endpoints allowed) of v^p exp(-c v^2 + i lambda v).
std::complex<double> profile_integral(int power, double gauss_rate, double osc_rate, double lo,
                                      double hi);

enum class TestFunctionKind { smooth, rough };

struct RandomFunctionOptions {
  double period = kTwoPi;
  double min_gauss_rate = 0.25;
  double max_gauss_rate = 2.0;
  int max_k = 2;
};

/// Deterministic pseudo-random oracle function. `smooth` is a Fourier-Gaussian
/// combination; `rough` adds at least one discontinuous indicator term.
AnalyticFunction random_analytic_function(std::uint64_t seed, TestFunctionKind kind,
                                          const RandomFunctionOptions& options = {});

/// exp(2 pi i k q / L) exp(-rate v^2).
AnalyticFunction gaussian_fourier(int k = 1, double rate = 0.5, double period = kTwoPi);
/// 1_[lo, hi](v), constant in q.
AnalyticFunction indicator_function(double lo = 0.0, double hi = 1.0, double period = kTwoPi);

}  // namespace prequant
