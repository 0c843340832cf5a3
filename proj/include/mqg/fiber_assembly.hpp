#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqg/core_model.hpp"

namespace mqg {

using cdouble = std::complex<double>;

enum class Regime { positive, negative };

const char* to_string(Regime r);
Regime parse_regime(const std::string& s);

/// Spectral parameter: momentum k > 0 (energy k^2) or decay rate kappa > 0
/// (energy -kappa^2). The negative regime is the substitution k -> i*kappa.
class SpectralParameter {
 public:
  SpectralParameter(Regime regime, double value);
  static SpectralParameter positive(double k) { return {Regime::positive, k}; }
  static SpectralParameter negative(double kappa) { return {Regime::negative, kappa}; }

  Regime regime() const { return regime_; }
  double value() const { return value_; }
  /// k, or i*kappa.
  cdouble momentum() const;
  double energy() const;

 private:
  Regime regime_;
  double value_;
};

enum class Direction : int { east = 0, north = 1, west = 2, south = 3 };

/// One half-edge of the unit-flux cell in edge-local coordinates: the vertex
/// sits at t = 0 and the far end at t = +1/2 (east, north) or -1/2 (west,
/// south).
struct HalfEdge {
  int index;
  int vertex;  // 1-based vertex index, also the gauge multiple on vertical edges
  Direction direction;

  bool vertical() const { return direction == Direction::north || direction == Direction::south; }
  /// +1 when the far end is at t = +1/2.
  int orientation() const {
    return direction == Direction::east || direction == Direction::north ? 1 : -1;
  }
};

enum class LinkKind { smooth_horizontal, floquet_horizontal, floquet_vertical };

/// Matching of the +1/2 end of `upper` with the -1/2 end of `lower`:
/// values and quasi-derivatives agree up to the Floquet phase on `lower`.
struct Link {
  LinkKind kind;
  int upper;
  int lower;
};

struct CellLayout {
  FluxRatio flux;
  std::vector<HalfEdge> half_edges;  // vertex-major, then E, N, W, S
  std::vector<Link> links;

  int vertex_count() const { return flux.q(); }
  int unknown_count() const { return 2 * static_cast<int>(half_edges.size()); }
  /// Gauge slope v*B of a half-edge (zero on horizontal edges).
  double gauge_slope(const HalfEdge& e) const { return e.vertical() ? e.vertex * flux.field() : 0.0; }
};

/// Accepts magnetic fluxes and the baseline sentinel.
CellLayout build_layout(const FluxRatio& flux);

enum class RowKind { vertex_coupling, horizontal_link, vertical_link };

/// Dense 8q x 8q secular matrix. Column 2*e + s holds the coefficient of
/// exp(+ikt) (s = 0) or exp(-ikt) (s = 1) on half-edge e.
struct FiberMatrix {
  Eigen::MatrixXcd entries;
  std::vector<RowKind> row_kinds;

  int dimension() const { return static_cast<int>(entries.rows()); }
};

FiberMatrix assemble(const SpectralParameter& z, const Quasimomentum& qm, const FluxRatio& flux);
FiberMatrix assemble(const SpectralParameter& z, const Quasimomentum& qm, const CellLayout& layout);

/// log|det| and arg(det). A singular matrix has log_magnitude = -inf.
struct LogDet {
  double log_magnitude;
  double phase;

  bool singular() const;
  cdouble value() const;
};

/// Summary of an LU factorisation with partial pivoting.
struct LuSummary {
  LogDet det;
  std::vector<double> pivot_magnitudes;

  /// Smallest over largest pivot magnitude.
  double smallest_pivot_ratio() const;
  /// Number of pivots below `relative` times the largest pivot.
  int rank_deficiency(double relative = 1e-10) const;
};

LogDet log_det(const Eigen::MatrixXcd& m);
LuSummary lu_summary(const Eigen::MatrixXcd& m);

/// Work arrays of the LU kernel.
struct LuScratch {
  std::vector<int> first, last, by_first, active, order, cols;
  std::vector<char> seen;
};

/// Reusable evaluator for one layout. Holds scratch buffers, so a single
/// instance must not be shared between threads; create one per worker.
class FiberEvaluator {
 public:
  explicit FiberEvaluator(CellLayout layout);

  const CellLayout& layout() const { return layout_; }
  int dimension() const { return n_; }

  LogDet log_det(const SpectralParameter& z, const Quasimomentum& qm);
  /// Same determinant with arbitrary complex Floquet factors in place of
  /// exp(i theta1) and exp(i theta2). The determinant is a polynomial in both.
  LogDet log_det(const SpectralParameter& z, cdouble floquet1, cdouble floquet2);
  LuSummary lu_summary(const SpectralParameter& z, const Quasimomentum& qm);
  FiberMatrix matrix(const SpectralParameter& z, const Quasimomentum& qm);

 private:
  void fill(const SpectralParameter& z, cdouble floquet1, cdouble floquet2);
  // Zeroes the touched part of work_; fill() relies on a zero buffer.
  void clear();

  CellLayout layout_;
  int n_;
  std::vector<RowKind> row_kinds_;
  Eigen::Matrix4cd u_minus_;  // U - I
  Eigen::Matrix4cd u_plus_;   // U + I
  std::vector<cdouble> work_;  // row-major n x n
  std::vector<double> pivots_;
  LuScratch scratch_;
};

}  // namespace mqg
