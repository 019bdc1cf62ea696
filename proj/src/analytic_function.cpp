#include "prequant/analytic_function.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <tuple>

#include "prequant/errors.hpp"

namespace prequant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::complex<double> kI{0.0, 1.0};

// Past this |v| the factor exp(-c v^2) underflows: c v^2 > 750.
double gaussian_cutoff(double gauss_rate) { return std::sqrt(750.0 / gauss_rate); }

std::complex<double> quadrature(int power, double gauss_rate, double osc_rate, double lo,
                                double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    const double cutoff = gaussian_cutoff(gauss_rate);
    lo = std::max(lo, -cutoff);
    hi = std::min(hi, cutoff);
    if (lo >= hi) return 0.0;
  }
  // The integrand is entire, so fixed 61-point panels sized to the oscillation and Gaussian
  // scales converge spectrally. Adaptive refinement stalls on integrals that cancel to ~0.
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double width = hi - lo;
  const double scale = std::max({std::abs(osc_rate) / 20.0, std::sqrt(gauss_rate) / 4.0, 1e-300});
  const int panels = static_cast<int>(std::clamp(std::ceil(width * scale), 1.0, 1e6));
  auto envelope = [=](double v) { return std::pow(v, power) * std::exp(-gauss_rate * v * v); };
  double re = 0.0;
  double im = 0.0;
  for (int panel = 0; panel < panels; ++panel) {
    const double a = lo + width * panel / panels;
    const double b = panel + 1 == panels ? hi : lo + width * (panel + 1) / panels;
    re += Rule::integrate([&](double v) { return envelope(v) * std::cos(osc_rate * v); }, a, b, 0);
    im += Rule::integrate([&](double v) { return envelope(v) * std::sin(osc_rate * v); }, a, b, 0);
  }
  return {re, im};
}

// v^p exp(-c v^2) over all of R, via I_p = (i lambda I_{p-1} + (p-1) I_{p-2}) / (2c).
std::complex<double> gaussian_full_line(int power, double c, double lambda) {
  std::complex<double> previous = 0.0;
  std::complex<double> current = std::sqrt(M_PI / c) * std::exp(-lambda * lambda / (4.0 * c));
  for (int p = 1; p <= power; ++p) {
    const std::complex<double> next =
        (kI * lambda * current + static_cast<double>(p - 1) * previous) / (2.0 * c);
    previous = current;
    current = next;
  }
  return current;
}

double gaussian_boundary(int j, double c, double x) {
  if (!std::isfinite(x)) return 0.0;
  return std::pow(x, j) * std::exp(-c * x * x);
}

// Real Gaussian moments on [lo, hi]: I_p = ((p-1) I_{p-2} - [v^{p-1} e^{-c v^2}]) / (2c).
double gaussian_segment(int power, double c, double lo, double hi) {
  const double root = std::sqrt(c);
  double mass;
  if (lo >= 0.0) {
    mass = std::erfc(root * lo) - std::erfc(root * hi);
  } else if (hi <= 0.0) {
    mass = std::erfc(-root * hi) - std::erfc(-root * lo);
  } else {
    mass = std::erf(root * hi) - std::erf(root * lo);
  }
  double previous = 0.0;
  double current = 0.5 * std::sqrt(M_PI / c) * mass;
  for (int p = 1; p <= power; ++p) {
    const double boundary = gaussian_boundary(p - 1, c, hi) - gaussian_boundary(p - 1, c, lo);
    const double next = (static_cast<double>(p - 1) * previous - boundary) / (2.0 * c);
    previous = current;
    current = next;
  }
  return current;
}

using MergeKey = std::tuple<int, double, double>;
using MergedTerms = std::map<MergeKey, std::complex<double>>;

// Parameters produced by different but equivalent group compositions differ in the last bits.
// Values closer than kSnapTolerance (relative) are identified so that such terms cancel exactly.
constexpr double kSnapTolerance = 1e-12;

class Snapper {
 public:
  explicit Snapper(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    for (double x : values) {
      if (representatives_.empty() || !close(representatives_.back(), x)) representatives_.push_back(x);
    }
  }

  double operator()(double x) const {
    auto it = std::lower_bound(representatives_.begin(), representatives_.end(), x);
    if (it != representatives_.end() && close(*it, x)) return *it;
    if (it != representatives_.begin() && close(*std::prev(it), x)) return *std::prev(it);
    return x;
  }

  const std::vector<double>& representatives() const { return representatives_; }

 private:
  static bool close(double x, double y) {
    if (std::isinf(x) || std::isinf(y)) return x == y;
    return std::abs(x - y) <= kSnapTolerance * std::max({1.0, std::abs(x), std::abs(y)});
  }

  std::vector<double> representatives_;
};

struct SnappedTerm {
  std::complex<double> coefficient;
  MergeKey key;
  std::optional<std::pair<double, double>> indicator;
};

MergedTerms merge_active(const std::vector<SnappedTerm>& terms, double lo, double hi) {
  MergedTerms merged;
  for (const auto& term : terms) {
    if (term.indicator && (term.indicator->first > lo || term.indicator->second < hi)) continue;
    merged[term.key] += term.coefficient;
  }
  return merged;
}

std::complex<double> mode_inner(const FourierMode& f, const FourierMode& g) {
  std::vector<double> breaks, rates, lambdas;
  for (const auto* terms : {&f.terms, &g.terms}) {
    for (const auto& term : *terms) {
      rates.push_back(term.gauss_rate);
      lambdas.push_back(term.osc_rate);
      if (!term.indicator) continue;
      breaks.push_back(term.indicator->first);
      breaks.push_back(term.indicator->second);
    }
  }
  const Snapper snap_break(breaks), snap_rate(rates), snap_lambda(lambdas);
  auto snapped = [&](const std::vector<ProfileTerm>& terms) {
    std::vector<SnappedTerm> result;
    for (const auto& term : terms) {
      SnappedTerm t{term.coefficient,
                    {term.power, snap_rate(term.gauss_rate), snap_lambda(term.osc_rate)},
                    std::nullopt};
      if (term.indicator) {
        t.indicator = std::make_pair(snap_break(term.indicator->first), snap_break(term.indicator->second));
      }
      result.push_back(t);
    }
    return result;
  };
  const std::vector<SnappedTerm> f_terms = snapped(f.terms);
  const std::vector<SnappedTerm> g_terms = snapped(g.terms);

  breaks = snap_break.representatives();
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [](double x) { return std::isinf(x); }),
               breaks.end());
  breaks.insert(breaks.begin(), -kInf);
  breaks.push_back(kInf);

  std::complex<double> total = 0.0;
  for (std::size_t piece = 0; piece + 1 < breaks.size(); ++piece) {
    const double lo = breaks[piece];
    const double hi = breaks[piece + 1];
    const MergedTerms left = merge_active(f_terms, lo, hi);
    const MergedTerms right = merge_active(g_terms, lo, hi);
    for (const auto& [lkey, lcoef] : left) {
      if (lcoef == 0.0) continue;
      for (const auto& [rkey, rcoef] : right) {
        if (rcoef == 0.0) continue;
        const int power = std::get<0>(lkey) + std::get<0>(rkey);
        const double rate = std::get<1>(lkey) + std::get<1>(rkey);
        const double lambda = std::get<2>(lkey) - std::get<2>(rkey);
        total += lcoef * std::conj(rcoef) * profile_integral(power, rate, lambda, lo, hi);
      }
    }
  }
  return total;
}

void normalize_modes(std::vector<FourierMode>& modes) {
  std::sort(modes.begin(), modes.end(),
            [](const FourierMode& x, const FourierMode& y) { return x.k < y.k; });
  std::vector<FourierMode> unique;
  for (auto& mode : modes) {
    if (!unique.empty() && unique.back().k == mode.k) {
      auto& terms = unique.back().terms;
      terms.insert(terms.end(), mode.terms.begin(), mode.terms.end());
    } else {
      unique.push_back(std::move(mode));
    }
  }
  modes = std::move(unique);
}

void validate_term(const ProfileTerm& term) {
  if (term.power < 0) throw std::invalid_argument("profile power must be non-negative");
  if (!(term.gauss_rate >= 0.0) || !std::isfinite(term.osc_rate)) {
    throw std::invalid_argument("profile rates must be finite with gauss_rate >= 0");
  }
  if (term.indicator && !(term.indicator->first <= term.indicator->second)) {
    throw std::invalid_argument("indicator interval must satisfy lo <= hi");
  }
  if (!term.square_integrable()) {
    throw std::invalid_argument("profile term is not square integrable");
  }
}

}  // namespace

std::complex<double> ProfileTerm::operator()(double v) const {
  if (indicator && (v < indicator->first || v > indicator->second)) return 0.0;
  return coefficient * std::pow(v, power) * std::exp(-gauss_rate * v * v) *
         std::exp(kI * (osc_rate * v));
}

std::complex<double> profile_integral(int power, double gauss_rate, double osc_rate, double lo,
                                      double hi) {
  if (!(lo < hi)) return 0.0;
  const bool finite = std::isfinite(lo) && std::isfinite(hi);
  if (!finite && !(gauss_rate > 0.0)) {
    throw std::domain_error("profile integral diverges on an unbounded interval");
  }
  if (!std::isfinite(lo) && !std::isfinite(hi)) {
    return gaussian_full_line(power, gauss_rate, osc_rate);
  }
  if (gauss_rate == 0.0) {
    if (osc_rate == 0.0) {
      const double p1 = power + 1.0;
      return (std::pow(hi, p1) - std::pow(lo, p1)) / p1;
    }
    if (power == 0) {
      // (e^{i l hi} - e^{i l lo}) / (i l) without cancellation.
      const double half = 0.5 * osc_rate * (hi - lo);
      return std::exp(kI * (0.5 * osc_rate * (hi + lo))) * (2.0 * std::sin(half) / osc_rate);
    }
    return quadrature(power, gauss_rate, osc_rate, lo, hi);
  }
  if (osc_rate == 0.0) {
    const double extent = std::max(std::abs(lo), std::abs(hi));
    if (!finite || gauss_rate * extent * extent >= 1.0) {
      return gaussian_segment(power, gauss_rate, lo, hi);
    }
  }
  return quadrature(power, gauss_rate, osc_rate, lo, hi);
}

AnalyticFunction::AnalyticFunction(double period) : period_(period) {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw std::invalid_argument("period must be positive");
  }
}

AnalyticFunction::AnalyticFunction(double period, int k, std::vector<ProfileTerm> terms)
    : AnalyticFunction(period) {
  add_mode(k, std::move(terms));
}

AnalyticFunction& AnalyticFunction::add_mode(int k, std::vector<ProfileTerm> terms) {
  for (const auto& term : terms) validate_term(term);
  modes_.push_back({k, std::move(terms)});
  normalize_modes(modes_);
  return *this;
}

bool AnalyticFunction::has_indicator() const {
  for (const auto& mode : modes_) {
    for (const auto& term : mode.terms) {
      if (term.indicator) return true;
    }
  }
  return false;
}

std::complex<double> AnalyticFunction::operator()(double q, double v) const {
  std::complex<double> value = 0.0;
  for (const auto& mode : modes_) {
    std::complex<double> profile = 0.0;
    for (const auto& term : mode.terms) profile += term(v);
    value += std::exp(kI * (kTwoPi * mode.k * q / period_)) * profile;
  }
  return value;
}

AnalyticFunction AnalyticFunction::pullback(const AffineElement& sigma) const {
  const double a = sigma.a();
  const double b = sigma.b();
  AnalyticFunction result(period_);
  result.modes_ = modes_;
  for (auto& mode : result.modes_) {
    const double shear = kTwoPi * mode.k * a / period_;
    for (auto& term : mode.terms) {
      term.coefficient *= std::pow(b, term.power);
      term.gauss_rate *= b * b;
      term.osc_rate = term.osc_rate * b + shear;
      if (term.indicator) term.indicator = {term.indicator->first / b, term.indicator->second / b};
    }
  }
  return result;
}

AnalyticFunction AnalyticFunction::scaled(std::complex<double> factor) const {
  AnalyticFunction result = *this;
  for (auto& mode : result.modes_) {
    for (auto& term : mode.terms) term.coefficient *= factor;
  }
  return result;
}

AnalyticFunction AnalyticFunction::geodesic_derivative() const {
  AnalyticFunction result(period_);
  for (const auto& mode : modes_) {
    if (mode.k == 0) continue;
    const std::complex<double> factor = kI * (kTwoPi * mode.k / period_);
    FourierMode derived{mode.k, mode.terms};
    for (auto& term : derived.terms) {
      term.coefficient *= factor;
      term.power += 1;
    }
    result.modes_.push_back(std::move(derived));
  }
  return result;
}

AnalyticFunction AnalyticFunction::euler_derivative() const {
  AnalyticFunction result(period_);
  for (const auto& mode : modes_) {
    FourierMode derived{mode.k, {}};
    for (const auto& term : mode.terms) {
      if (term.indicator) {
        throw std::domain_error("Euler derivative of an indicator term is not a function");
      }
      // v d/dv [c v^p e^{-g v^2 + i l v}] = c (p v^p - 2 g v^{p+2} + i l v^{p+1}) e^{...}
      if (term.power > 0) {
        ProfileTerm t = term;
        t.coefficient *= static_cast<double>(term.power);
        derived.terms.push_back(t);
      }
      if (term.gauss_rate != 0.0) {
        ProfileTerm t = term;
        t.coefficient *= -2.0 * term.gauss_rate;
        t.power += 2;
        derived.terms.push_back(t);
      }
      if (term.osc_rate != 0.0) {
        ProfileTerm t = term;
        t.coefficient *= kI * term.osc_rate;
        t.power += 1;
        derived.terms.push_back(t);
      }
    }
    if (!derived.terms.empty()) result.modes_.push_back(std::move(derived));
  }
  return result;
}

AnalyticFunction operator+(const AnalyticFunction& lhs, const AnalyticFunction& rhs) {
  if (lhs.period_ != rhs.period_) {
    throw BackendMismatchError("analytic functions on tori with different periods");
  }
  AnalyticFunction result = lhs;
  result.modes_.insert(result.modes_.end(), rhs.modes_.begin(), rhs.modes_.end());
  normalize_modes(result.modes_);
  return result;
}

AnalyticFunction operator-(const AnalyticFunction& lhs, const AnalyticFunction& rhs) {
  return lhs + rhs.scaled(-1.0);
}

std::complex<double> inner(const AnalyticFunction& f, const AnalyticFunction& g) {
  if (f.period() != g.period()) {
    throw BackendMismatchError("analytic functions on tori with different periods");
  }
  std::complex<double> total = 0.0;
  auto gi = g.modes().begin();
  for (const auto& mode : f.modes()) {
    while (gi != g.modes().end() && gi->k < mode.k) ++gi;
    if (gi == g.modes().end()) break;
    if (gi->k == mode.k) total += mode_inner(mode, *gi);
  }
  return f.period() * total;
}

double norm(const AnalyticFunction& f) { return std::sqrt(std::max(0.0, inner(f, f).real())); }

AnalyticFunction random_analytic_function(std::uint64_t seed, TestFunctionKind kind,
                                          const RandomFunctionOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> k_dist(-options.max_k, options.max_k);
  std::uniform_int_distribution<int> count_dist(1, 2);
  std::uniform_int_distribution<int> power_dist(0, 2);
  std::uniform_real_distribution<double> rate_dist(options.min_gauss_rate,
                                                   options.max_gauss_rate);
  std::uniform_real_distribution<double> osc_dist(-1.5, 1.5);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto coefficient = [&] { return std::complex<double>(normal(rng), normal(rng)); };

  AnalyticFunction f(options.period);
  const int mode_count = count_dist(rng) + (kind == TestFunctionKind::smooth ? 1 : 0);
  for (int mode = 0; mode < mode_count; ++mode) {
    const int k = k_dist(rng);
    std::vector<ProfileTerm> terms;
    const int term_count = count_dist(rng);
    for (int t = 0; t < term_count; ++t) {
      terms.push_back({coefficient(), power_dist(rng), rate_dist(rng), osc_dist(rng), {}});
    }
    f.add_mode(k, std::move(terms));
  }
  if (kind == TestFunctionKind::rough) {
    std::uniform_real_distribution<double> left(-2.5, -0.5);
    std::uniform_real_distribution<double> right(0.5, 2.5);
    const int jumps = count_dist(rng);
    for (int j = 0; j < jumps; ++j) {
      const int k = k_dist(rng);
      std::complex<double> c = coefficient();
      c *= 1.5 / std::abs(c);
      f.add_mode(k, {{c, 0, 0.0, 0.0, std::pair{left(rng), right(rng)}}});
    }
  }
  return f;
}

AnalyticFunction gaussian_fourier(int k, double rate, double period) {
  return {period, k, {{1.0, 0, rate, 0.0, {}}}};
}

AnalyticFunction indicator_function(double lo, double hi, double period) {
  return {period, 0, {{1.0, 0, 0.0, 0.0, std::pair{lo, hi}}}};
}

}  // namespace prequant
