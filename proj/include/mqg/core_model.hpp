#pragma once

// Unit conventions used across the engine: hbar = 2m = e = c = 1, lattice edge
// length 1, coupling length scale 1, flux quantum 2*pi.

#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace mqg {

/// Rational flux p/q per plaquette, kept as the exact integer pair.
///
/// The magnetic field B = 2*pi*p/q is only materialised at evaluation sites.
/// The non-magnetic lattice is the sentinel pair (0, 1); it is constructed via
/// `baseline()` and accepted only by operations that document it.
class FluxRatio {
 public:
  /// Validated magnetic flux: gcd(p, q) = 1 and 1 <= p < q.
  static FluxRatio make(int p, int q);
  static FluxRatio baseline() { return FluxRatio(0, 1); }

  int p() const { return p_; }
  int q() const { return q_; }
  bool is_baseline() const { return p_ == 0; }

  /// B = 2*pi*p/q.
  double field() const { return 2.0 * std::numbers::pi * p_ / q_; }

  /// Phase v*B*t accumulated by the gauge factor of vertex v over a vertical
  /// half-edge of length |t| = 1/2, reduced modulo 2*pi in integer arithmetic.
  double half_edge_gauge_phase(int vertex) const;

  friend bool operator==(const FluxRatio&, const FluxRatio&) = default;
  friend auto operator<=>(const FluxRatio& a, const FluxRatio& b) {
    if (auto c = a.q_ <=> b.q_; c != 0) return c;
    return a.p_ <=> b.p_;
  }

 private:
  FluxRatio(int p, int q) : p_(p), q_(q) {}
  int p_;
  int q_;
};

FluxRatio make_flux(int p, int q);

/// All reduced ratios p/q with 2 <= q <= qmax, ordered by (q, p).
std::vector<FluxRatio> coprime_ratios(int qmax);

/// Every flux in [0, 1) with denominator <= qmax: the baseline 0/1 followed by
/// coprime_ratios(qmax).
std::vector<FluxRatio> flux_values(int qmax);

/// Quasimomentum (theta1, theta2), both in [-pi, pi).
class Quasimomentum {
 public:
  Quasimomentum(double theta1, double theta2);

  /// Wraps arbitrary angles into the Brillouin interval.
  static Quasimomentum wrapped(double theta1, double theta2);

  /// Representatives with Theta_q = +2, -2 and 0. The Theta_q = 0 point is
  /// chosen so that the phase theta1 + q*theta2 vanishes, like the two
  /// extremal points; the fiber determinant then sits on one affine line.
  static Quasimomentum theta_plus_two() { return {0.0, 0.0}; }
  static Quasimomentum theta_minus_two(int q);
  static Quasimomentum theta_zero(int q);

  double theta1() const { return theta1_; }
  double theta2() const { return theta2_; }

 private:
  double theta1_;
  double theta2_;
};

struct ThetaQ {
  double value;
};

/// Theta_q = cos(q*theta2) + cos(theta1), always in [-2, 2].
ThetaQ theta_q(const Quasimomentum& qm, int q);

/// Circulant shift coupling: entry (j, j+1 mod n) = 1.
struct CouplingMatrix {
  int n;
  Eigen::MatrixXcd entries;
};

CouplingMatrix coupling_matrix(int n);

}  // namespace mqg
