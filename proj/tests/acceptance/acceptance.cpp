// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "prequant/experiments.hpp"
#include "prequant/field.hpp"
#include "prequant/halfform.hpp"
#include "prequant/phasespace.hpp"
#include "prequant/prequantum.hpp"
#include "prequant/rho.hpp"

using namespace prequant;

namespace {

// Tolerances, pinned.
constexpr double kUnitarityTol = 1e-9;
constexpr double kMinGridOrder = 3.0;
constexpr double kRuntimeBudgetSeconds = 60.0;
constexpr double kHomomorphismTol = 1e-9;
constexpr double kJacobianTol = 1e-12;
constexpr double kProp32Tol = 1e-12;
constexpr double kCurvatureGridTol = 1e-6;
constexpr double kRatioLo = 1.6;
constexpr double kRatioHi = 2.4;
constexpr double kSqrtLawBand = 0.05;
constexpr double kSlopeLo = -0.55;
constexpr double kSlopeHi = -0.45;
constexpr double kClosedFormTol = 1e-10;
constexpr double kChartAAnalyticTol = 1e-14;
constexpr double kChartAGridTol = 1e-13;
constexpr double kChartBTol = 1e-9;
constexpr double kCompositionTol = 1e-12;
constexpr double kNormIdentityTol = 1e-9;
constexpr double kGridFieldTol = 1e-6;
constexpr int kCases = 100;

const double kSqrtTwoPi = std::sqrt(2.0 * oracle::kPi);

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

GridFunction grid_gaussian(const GridSpec& spec, double rate) {
  return GridFunction::sample(spec, [&](std::span<const double> q, std::span<const double> v) {
    return std::polar(std::exp(-rate * v[0] * v[0]), q[0]);
  });
}

GridSpec grid_with(int n_v) {
  GridSpec spec;
  spec.n_v = n_v;
  return spec;
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

Outcome criterion_unitarity() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int i = 0; i < kCases; ++i) {
    const AffineElement sigma(uniform(rng, -5, 5), log_uniform(rng, 0.1, 10));
    const L2Function f = random_test_function(1000 + i, i % 2 ? TestFunctionKind::rough : TestFunctionKind::smooth);
    worst = std::max(worst, unitarity_defect(sigma, f) / norm(f));
  }
  out.require(worst <= kUnitarityTol, fmt::format("analytic defect {}", worst));

  const AffineElement sigma(0.3, 0.7);
  std::vector<double> defects;
  for (int n_v : {257, 513, 1025}) {
    const L2Function f = grid_gaussian(grid_with(n_v), 2.0);
    defects.push_back(unitarity_defect(sigma, f) / norm(f));
  }
  const double o1 = order(defects[0], defects[1]), o2 = order(defects[1], defects[2]);
  out.require(o1 >= kMinGridOrder && o2 >= kMinGridOrder, fmt::format("grid orders {:.2f} {:.2f}", o1, o2));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.require(seconds < kRuntimeBudgetSeconds, fmt::format("runtime {:.1f}s", seconds));
  if (out.pass) {
    out.detail = fmt::format("max analytic defect {:.2e}, grid orders {:.2f} {:.2f}, {:.2f}s", worst, o1, o2, seconds);
  }
  return out;
}

Outcome criterion_homomorphism() {
  Outcome out;
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int i = 0; i < kCases; ++i) {
    const AffineElement s1(uniform(rng, -5, 5), log_uniform(rng, 0.1, 10));
    const AffineElement s2(uniform(rng, -5, 5), log_uniform(rng, 0.1, 10));
    const L2Function f = random_test_function(2000 + i, i % 2 ? TestFunctionKind::rough : TestFunctionKind::smooth);
    const double defect = norm(apply_rho(compose(s1, s2), f) - apply_rho(s1, apply_rho(s2, f))) / norm(f);
    worst = std::max(worst, defect);
  }
  out.require(worst <= kHomomorphismTol, fmt::format("defect {}", worst));
  if (out.pass) out.detail = fmt::format("max relative defect {:.2e}", worst);
  return out;
}

Outcome criterion_scaling() {
  Outcome out;
  std::mt19937_64 rng(103);
  double worst_omega = 0.0, worst_det = 0.0;
  for (int m = 1; m <= 3; ++m) {
    for (int i = 0; i < kCases; ++i) {
      const AffineElement sigma(uniform(rng, -5, 5), log_uniform(rng, 0.1, 10));
      const ScalingCheck check = pullback_scaling_check(sigma, m);
      const double expected = std::pow(sigma.b(), m);
      worst_omega = std::max(worst_omega, check.omega_residual);
      worst_det = std::max(worst_det, std::abs(check.jacobian_determinant - expected) / expected);
    }
  }
  out.require(worst_omega == 0.0, fmt::format("omega residual {}", worst_omega));
  out.require(worst_det <= kJacobianTol, fmt::format("determinant {}", worst_det));
  if (out.pass) out.detail = fmt::format("omega residual 0, max det deviation {:.2e}", worst_det);
  return out;
}

Outcome criterion_prop32() {
  Outcome out;
  std::mt19937_64 rng(104);
  double worst = 0.0, worst_imag = 0.0, worst_re = 0.0;
  bool positive = true;
  for (int i = 0; i < kCases; ++i) {
    const UpperHalfPlanePoint s(uniform(rng, -5, 5), log_uniform(rng, 0.1, 10));
    for (int m = 1; m <= 3; ++m) {
      const double closed = std::pow(2.0 * s.im(), m);
      const auto density = wedge_density_complex(s, m);
      worst = std::max(worst, prop32_residual(s, m) / closed);
      worst_imag = std::max(worst_imag, std::abs(density.imag()) / std::max(closed, std::pow(2.0 * std::abs(s.value()), m)));
      worst_re = std::max(worst_re, std::abs(density.real() - wedge_density({0.0, s.im()}, m)) / closed);
      positive = positive && density.real() > 0.0;
    }
  }
  out.require(worst <= kProp32Tol, fmt::format("residual {}", worst));
  out.require(worst_imag <= kProp32Tol, fmt::format("imaginary part {}", worst_imag));
  out.require(worst_re <= kProp32Tol, fmt::format("Re s dependence {}", worst_re));
  out.require(positive, "non-positive density");
  if (out.pass) out.detail = fmt::format("max relative residual {:.2e}, real, positive, Re-independent", worst);
  return out;
}

Outcome criterion_curvature() {
  Outcome out;
  double symbolic = 0.0;
  for (int m = 1; m <= 3; ++m) {
    const ConnectionPotential a = ConnectionPotential::standard(m);
    symbolic = std::max({symbolic, symbolic_curvature_residual(a), potential_residual(a)});
  }
  out.require(symbolic == 0.0, fmt::format("symbolic residual {}", symbolic));
  std::vector<double> residuals;
  for (int n_v : {257, 513, 1025}) residuals.push_back(curvature_residual(grid_gaussian(grid_with(n_v), 0.5)));
  const double at_default = curvature_residual(grid_gaussian(GridSpec{}, 0.5));
  const double o1 = order(residuals[0], residuals[1]), o2 = order(residuals[1], residuals[2]);
  out.require(at_default <= kCurvatureGridTol, fmt::format("default grid residual {}", at_default));
  out.require(o1 >= kMinGridOrder && o2 >= kMinGridOrder, fmt::format("orders {:.2f} {:.2f}", o1, o2));
  if (out.pass) {
    out.detail = fmt::format("symbolic 0, default grid {:.2e}, orders {:.2f} {:.2f}", at_default, o1, o2);
  }
  return out;
}

Outcome criterion_derivative() {
  Outcome out;
  const std::complex<double> i(0.0, 1.0);
  const AnalyticFunction f = gaussian_fourier(1, 0.5);
  // Generators written out by hand: (1/2 - v^2) f and i v f.
  const AnalyticFunction beta_expected(kTwoPi, 1, {{0.5, 0, 0.5, 0.0, std::nullopt}, {-1.0, 2, 0.5, 0.0, std::nullopt}});
  const AnalyticFunction alpha_expected(kTwoPi, 1, {{i, 1, 0.5, 0.0, std::nullopt}});
  out.require(norm(rho_generator(CurveInGroup::Kind::beta, f) - beta_expected) < 1e-14, "beta generator");
  out.require(norm(rho_generator(CurveInGroup::Kind::alpha, f) - alpha_expected) < 1e-14, "alpha generator");
  std::string ratios;
  for (const auto& curve : {CurveInGroup::beta(), CurveInGroup::alpha()}) {
    std::vector<double> r;
    for (double u : {1e-2, 5e-3, 2.5e-3}) r.push_back(derivative_residual(curve, f, u));
    for (std::size_t k = 1; k < r.size(); ++k) {
      const double ratio = r[k - 1] / r[k];
      out.require(ratio >= kRatioLo && ratio <= kRatioHi, fmt::format("{} ratio {}", curve.name(), ratio));
      ratios += fmt::format(" {}:{:.3f}", curve.name(), ratio);
    }
  }
  if (out.pass) out.detail = "halving ratios" + ratios;
  return out;
}

Outcome criterion_nondiff() {
  Outcome out;
  const L2Function box = indicator_function(0.0, 1.0);
  const std::vector<double> steps{1e-2, 1e-4, 1e-6};
  std::vector<double> quotients;
  double worst_closed = 0.0;
  for (double u : steps) {
    const double q = difference_quotient(CurveInGroup::beta(), box, u);
    quotients.push_back(q);
    const double scaled = q * std::sqrt(u) / kSqrtTwoPi;
    out.require(std::abs(scaled - 1.0) <= kSqrtLawBand, fmt::format("q*sqrt(u)/sqrt(2pi) = {} at u={}", scaled, u));
    // The displayed closed form, evaluated with expm1 to keep its digits, and the
    // interval-length oracle.
    const double jump = std::expm1(u / 2);
    const double closed = std::sqrt(2 * oracle::kPi * (jump * jump * std::exp(-u) - std::expm1(-u))) / u;
    worst_closed = std::max({worst_closed, std::abs(q - closed) / closed,
                             std::abs(q - oracle::indicator_quotient(u)) / closed});
  }
  const double slope = loglog_slope(steps, quotients);
  out.require(slope >= kSlopeLo && slope <= kSlopeHi, fmt::format("slope {}", slope));
  out.require(worst_closed <= kClosedFormTol, fmt::format("closed form {}", worst_closed));
  if (out.pass) out.detail = fmt::format("slope {:.4f}, closed-form deviation {:.2e}", slope, worst_closed);
  return out;
}

Outcome criterion_trivializations() {
  Outcome out;
  std::mt19937_64 rng(108);
  double chart_a = 0.0, chart_b = 0.0, composition = 0.0, identity = 0.0;
  for (int i = 0; i < kCases; ++i) {
    const UpperHalfPlanePoint s(uniform(rng, -5, 5), log_uniform(rng, 0.1, 10));
    const L2Function f = random_test_function(3000 + i, i % 2 ? TestFunctionKind::rough : TestFunctionKind::smooth);
    const double n = norm(f);
    chart_a = std::max(chart_a, std::abs(fiber_norm(triv_A(s, f)) - n) / n);
    const FieldElement psi{s, f};
    chart_b = std::max(chart_b, std::abs(norm(triv_B(psi).function) - fiber_norm(psi)) / fiber_norm(psi));
    composition = std::max(composition, norm(transition(s, f) - triv_B(triv_A(s, f)).function) / n);
    identity = std::max(identity, fiber_norm_identity(psi).relative_residual);
  }
  out.require(chart_a <= kChartAAnalyticTol, fmt::format("A {}", chart_a));
  out.require(chart_b <= kChartBTol, fmt::format("B {}", chart_b));
  out.require(composition <= kCompositionTol, fmt::format("B o A {}", composition));
  out.require(identity <= kNormIdentityTol, fmt::format("norm identity {}", identity));

  GridSpec spec;
  double grid_a = 0.0, grid_b = 0.0, grid_composition = 0.0, grid_identity = 0.0;
  for (int i = 0; i < kCases; ++i) {
    const UpperHalfPlanePoint s(uniform(rng, -5, 5), log_uniform(rng, 0.5, 2.0));
    const L2Function f = random_test_function(4000 + i, TestFunctionKind::smooth, spec);
    const double n = norm(f);
    grid_a = std::max(grid_a, std::abs(fiber_norm(triv_A(s, f)) - n) / n);
    const FieldElement psi{s, f};
    grid_b = std::max(grid_b, std::abs(norm(triv_B(psi).function) - fiber_norm(psi)) / fiber_norm(psi));
    grid_composition = std::max(grid_composition, norm(transition(s, f) - triv_B(triv_A(s, f)).function) / n);
    grid_identity = std::max(grid_identity, fiber_norm_identity(psi).relative_residual);
  }
  out.require(grid_a <= kChartAGridTol, fmt::format("grid A {}", grid_a));
  out.require(grid_b <= kGridFieldTol, fmt::format("grid B {}", grid_b));
  out.require(grid_composition <= kCompositionTol, fmt::format("grid B o A {}", grid_composition));
  out.require(grid_identity <= kGridFieldTol, fmt::format("grid norm identity {}", grid_identity));
  if (out.pass) {
    out.detail = fmt::format("analytic A {:.1e} B {:.1e} BoA {:.1e} id {:.1e}; grid A {:.1e} B {:.1e} BoA {:.1e} id {:.1e}",
                             chart_a, chart_b, composition, identity, grid_a, grid_b, grid_composition, grid_identity);
  }
  return out;
}

Outcome criterion_smoothness_contrast() {
  Outcome out;
  std::ifstream in(std::string(PREQUANT_CONFIG_DIR) + "/transition-smoothness.json");
  const auto config = ExperimentConfig::from_json(nlohmann::json::parse(in));
  const auto rows = run(config, 4);
  int cauchy = 0, rates = 0;
  for (const auto& row : rows) {
    const std::string* check = row.param("check");
    if (!check) continue;
    if (*check == "cauchy") ++cauchy;
    if (*check == "divergence-rate") {
      ++rates;
      out.require(row.measured >= kSlopeLo && row.measured <= kSlopeHi,
                  fmt::format("slope {} for {}", row.measured, *row.param("oracle")));
    }
  }
  const int smooth_oracles = 1 + config.samples;
  out.require(cauchy == 2 * smooth_oracles, fmt::format("{} Cauchy rows", cauchy));
  out.require(rates == 1 + config.samples, fmt::format("{} divergence rows", rates));
  const ReportSummary summary = summarize(rows);
  out.require(summary.pass(), fmt::format("{} failing rows", summary.failed));
  if (out.pass) {
    out.detail = fmt::format("{} smooth Cauchy checks, {} indicator divergence fits, {} rows pass", cauchy, rates,
                             summary.passed);
  }
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
      {"unitarity", criterion_unitarity},
      {"homomorphism law", criterion_homomorphism},
      {"scaling laws", criterion_scaling},
      {"half-form density identity", criterion_prop32},
      {"curvature", criterion_curvature},
      {"derivative formulas", criterion_derivative},
      {"non-differentiability", criterion_nondiff},
      {"trivialization unitarity and composition", criterion_trivializations},
      {"smoothness contrast", criterion_smoothness_contrast}};
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome outcome;
    try {
      outcome = criteria[k].second();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    failures += outcome.pass ? 0 : 1;
    fmt::print("{} criterion {}: {} ({})\n", outcome.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, outcome.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
