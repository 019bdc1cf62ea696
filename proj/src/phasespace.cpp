#include "prequant/phasespace.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prequant {

void TorusConfig::validate() const {
  if (m < 1) throw std::invalid_argument("torus dimension must be at least 1");
  if (periods.size() != static_cast<std::size_t>(m)) {
    throw std::invalid_argument("torus needs exactly m periods");
  }
  for (double period : periods) {
    if (!(period > 0.0) || !std::isfinite(period)) {
      throw std::invalid_argument("torus periods must be positive and finite");
    }
  }
}

double reduce_periodic(double x, double period) {
  double r = x - period * std::floor(x / period);
  // floor can round so that r == period for x slightly below a multiple.
  return r >= period ? 0.0 : r;
}

PhasePoint::PhasePoint(const TorusConfig& config, std::vector<double> q_in,
                       std::vector<double> v_in)
    : q(std::move(q_in)), v(std::move(v_in)) {
  config.validate();
  if (q.size() != config.periods.size() || v.size() != config.periods.size()) {
    throw std::invalid_argument("phase point dimension does not match the torus");
  }
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = reduce_periodic(q[j], config.periods[j]);
}

PhasePoint act(const TorusConfig& config, const AffineElement& sigma, const PhasePoint& x) {
  std::vector<double> q(x.q.size());
  std::vector<double> v(x.v.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    q[j] = x.q[j] + sigma.a() * x.v[j];
    v[j] = sigma.b() * x.v[j];
  }
  return {config, std::move(q), std::move(v)};
}

std::vector<std::complex<double>> adapted_coordinate(const UpperHalfPlanePoint& s,
                                                     const PhasePoint& x) {
  std::vector<std::complex<double>> z(x.q.size());
  for (std::size_t j = 0; j < z.size(); ++j) z[j] = x.q[j] + s.value() * x.v[j];
  return z;
}

FlowFields flow_fields(const PhasePoint& x) {
  const std::vector<double> zero(x.q.size(), 0.0);
  return {{x.v, zero}, {zero, x.v}};
}

ScalingCheck pullback_scaling_check(const AffineElement& sigma, int m) {
  if (m < 1) throw std::invalid_argument("dimension must be at least 1");
  const int n = 2 * m;
  // Coordinates ordered (q_1, v_1, ..., q_m, v_m).
  Eigen::MatrixXd jacobian = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < m; ++j) {
    const int q = 2 * j;
    const int v = 2 * j + 1;
    jacobian(q, q) = 1.0;
    jacobian(q, v) = sigma.a();
    jacobian(v, v) = sigma.b();
    omega(q, v) = -1.0;  // (dv ^ dq)(d_q, d_v)
    omega(v, q) = 1.0;
  }
  const Eigen::MatrixXd pulled = jacobian.transpose() * omega * jacobian;
  const double residual = (pulled - chi(sigma) * omega).cwiseAbs().maxCoeff();
  return {residual, jacobian.fullPivLu().determinant()};
}

double cr_residual(const TorusConfig& config, const PhasePoint& x, const AffineElement& sigma,
                   double step) {
  const UpperHalfPlanePoint i_point(0.0, 1.0);
  auto coordinate = [&](double a, double b) {
    return adapted_coordinate(i_point, act(config, AffineElement(a, b), x));
  };
  const auto a_plus = coordinate(sigma.a() + step, sigma.b());
  const auto a_minus = coordinate(sigma.a() - step, sigma.b());
  const auto b_plus = coordinate(sigma.a(), sigma.b() + step);
  const auto b_minus = coordinate(sigma.a(), sigma.b() - step);

  double residual = 0.0;
  for (std::size_t j = 0; j < x.q.size(); ++j) {
    const double period = config.periods[j];
    // Real parts live on the circle; unwrap the difference into (-L/2, L/2].
    auto unwrap = [period](std::complex<double> dz) {
      double re = std::remainder(dz.real(), period);
      return std::complex<double>(re, dz.imag());
    };
    const auto d_da = unwrap(a_plus[j] - a_minus[j]) / (2.0 * step);
    const auto d_db = unwrap(b_plus[j] - b_minus[j]) / (2.0 * step);
    residual = std::max(residual, std::abs(d_db - std::complex<double>(0.0, 1.0) * d_da));
  }
  return residual;
}

}  // namespace prequant
