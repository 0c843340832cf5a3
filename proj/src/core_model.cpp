#include "mqg/core_model.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mqg/errors.hpp"

namespace mqg {

namespace {

constexpr double pi = std::numbers::pi;

double wrap_angle(double a) {
  double w = std::fmod(a + pi, 2.0 * pi);
  if (w < 0.0) w += 2.0 * pi;
  w -= pi;
  return w >= pi ? -pi : w;
}

}  // namespace

FluxRatio FluxRatio::make(int p, int q) {
  if (q < 2 || p <= 0 || p >= q) {
    throw ValidationError("flux " + std::to_string(p) + "/" + std::to_string(q) +
                          " out of range: need q >= 2 and 1 <= p < q");
  }
  if (std::gcd(p, q) != 1) {
    throw ValidationError("flux " + std::to_string(p) + "/" + std::to_string(q) +
                          " not reduced: p and q must be coprime");
  }
  return FluxRatio(p, q);
}

double FluxRatio::half_edge_gauge_phase(int vertex) const {
  // (v * 2*pi*p/q) / 2 = pi * (p*v mod 2q) / q
  const long long m = (static_cast<long long>(p_) * vertex) % (2LL * q_);
  return pi * static_cast<double>(m) / q_;
}

FluxRatio make_flux(int p, int q) { return FluxRatio::make(p, q); }

std::vector<FluxRatio> coprime_ratios(int qmax) {
  std::vector<FluxRatio> out;
  for (int q = 2; q <= qmax; ++q) {
    for (int p = 1; p < q; ++p) {
      if (std::gcd(p, q) == 1) out.push_back(FluxRatio::make(p, q));
    }
  }
  return out;
}

std::vector<FluxRatio> flux_values(int qmax) {
  std::vector<FluxRatio> out{FluxRatio::baseline()};
  const auto magnetic = coprime_ratios(qmax);
  out.insert(out.end(), magnetic.begin(), magnetic.end());
  return out;
}

Quasimomentum::Quasimomentum(double theta1, double theta2) : theta1_(theta1), theta2_(theta2) {
  auto ok = [](double t) { return std::isfinite(t) && t >= -pi && t < pi; };
  if (!ok(theta1) || !ok(theta2)) {
    throw ValidationError("quasimomentum components must lie in [-pi, pi)");
  }
}

Quasimomentum Quasimomentum::wrapped(double theta1, double theta2) {
  return {wrap_angle(theta1), wrap_angle(theta2)};
}

Quasimomentum Quasimomentum::theta_minus_two(int q) {
  // cos(q * pi/q) = -1; for the single-vertex baseline cell use theta2 = -pi.
  return {-pi, q >= 2 ? pi / q : -pi};
}

Quasimomentum Quasimomentum::theta_zero(int q) { return {pi / 2.0, -pi / (2.0 * q)}; }

ThetaQ theta_q(const Quasimomentum& qm, int q) {
  return {std::cos(q * qm.theta2()) + std::cos(qm.theta1())};
}

CouplingMatrix coupling_matrix(int n) {
  if (n < 3) throw ValidationError("coupling matrix needs degree n >= 3");
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) u(j, (j + 1) % n) = 1.0;
  return {n, std::move(u)};
}

}  // namespace mqg
