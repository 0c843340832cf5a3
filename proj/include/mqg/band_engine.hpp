#pragma once

#include <vector>

#include "mqg/core_model.hpp"
#include "mqg/fiber_assembly.hpp"

namespace mqg {

/// Numerical policy of the band engine.
struct BandOptions {
  /// Half-width of the exclusion windows around the zeros of
  /// s(k) = (k^2 - 1)^q sin^q k, i.e. k = 1 and k = n*pi (and kappa = 0).
  double exclusion_halfwidth = 1e-6;
  /// Half-width of the window at z = 0. There h and s vanish together, so
  /// theta* is a 0/0 limit and loses precision like eps/z^2; the default keeps
  /// the error below 1e-9.
  double origin_halfwidth = 1e-3;
  /// Grid samples per unit of the spectral parameter.
  double grid_density = 2e4;
  /// Bisection tolerance on band edges, in units of k or kappa.
  double edge_tol = 1e-10;
  /// Allowed |Im| of the recovered band function, relative to max(1, |theta*|).
  double imag_tol = 1e-7;
  /// |r - 1| below this, with r the ratio of the determinants at Theta_q = +2
  /// and -2, means the determinant no longer depends on the quasimomentum.
  double ring_tol = 1e-12;
  /// Local extrema of |theta*| - 2 closer to zero than this are resampled on a
  /// 10x denser grid before bands are declared separate or merged.
  double touch_threshold = 0.5;
};

inline constexpr double default_kappa_max = 6.0;

struct BandFunctionSample {
  SpectralParameter z;
  /// The unique Theta_q solving the secular equation at z.
  double theta_star;
  double imag_residual;

  bool in_band() const { return theta_star >= -2.0 && theta_star <= 2.0; }
};

enum class ProbeStatus { ok, singular_ring, non_collapse };

struct Probe {
  ProbeStatus status;
  double theta_star;  // NaN unless status is ok or non_collapse
  double imag_residual;
  /// |r - 1| = 4 / |theta* + 2|, for diagnostics.
  double ring_distance;

  /// Band criterion |theta*| - 2, +inf on the singular ring.
  double excess() const;
  bool in_band() const { return excess() <= 0.0; }
};

/// True if z lies inside the exclusion window of a zero of s(k) (or of
/// kappa = 0).
bool in_exclusion_window(const SpectralParameter& z, const BandOptions& options = {});

/// Zeros of s(k) (or kappa = 0) inside [lo, hi], ascending.
std::vector<double> singular_points(Regime regime, double lo, double hi);

/// Band function theta*(z) = -h/s. The cell determinant is
///   c [h f1 f2^q + (s/2)(f1^2 + 1) f2^q + (s/2) f1 (f2^2q + 1)]
/// in the Floquet factors f1, f2. At (1, 1) it is c (h + 2s) and at (0, 1) it
/// is c s / 2, so theta* = 2 - d(1, 1) / (2 d(0, 1)) without the cancellation
/// that a ratio of two nearly equal determinants suffers when |theta*| is
/// large. One instance per thread.
class BandFunction {
 public:
  explicit BandFunction(const FluxRatio& flux, BandOptions options = {});

  const FluxRatio& flux() const { return flux_; }
  const BandOptions& options() const { return options_; }

  /// Non-throwing evaluation; ignores exclusion windows.
  Probe probe(const SpectralParameter& z);

  /// Checked evaluation. Throws ValidationError inside an exclusion window,
  /// SingularRingError and NonCollapseError per the band-function contract.
  BandFunctionSample operator()(const SpectralParameter& z);

 private:
  FluxRatio flux_;
  BandOptions options_;
  FiberEvaluator evaluator_;
};

BandFunctionSample band_function(const SpectralParameter& z, const FluxRatio& flux,
                                 const BandOptions& options = {});

/// Closed spectral band. z_lo < z_hi are momenta (or decay rates); e_lo < e_hi
/// are the corresponding energies k^2 (or -kappa^2).
struct Band {
  double z_lo;
  double z_hi;
  double e_lo;
  double e_hi;
  /// Set when this band was merged with a neighbour across a gap below the
  /// edge tolerance.
  bool touching = false;

  double momentum_width() const { return z_hi - z_lo; }
  double energy_width() const { return e_hi - e_lo; }
};

struct BandSet {
  FluxRatio flux;
  Regime regime;
  /// Sorted by energy, pairwise disjoint.
  std::vector<Band> bands;
  double edge_tolerance;
  /// Scanned range of the spectral parameter.
  double z_min;
  double z_max;
  /// Number of local extrema that were resampled on the dense grid.
  int refined_extrema = 0;
  /// Number of merges across gaps below the edge tolerance.
  int touching_merges = 0;
};

/// Bands for z in (0, limit]. Accepts the baseline flux.
BandSet scan_bands(const FluxRatio& flux, Regime regime, double limit, const BandOptions& options = {});

/// Bands for z in [lo, hi]; the exclusion windows are cut out of the range.
BandSet scan_window(const FluxRatio& flux, Regime regime, double lo, double hi,
                    const BandOptions& options = {});

/// Bisection root of |theta*| - 2 inside the bracket, to within tol.
double refine_edge(double z_a, double z_b, const FluxRatio& flux, Regime regime, double tol,
                   const BandOptions& options = {});
double refine_edge(double z_a, double z_b, BandFunction& f, Regime regime, double tol);

}  // namespace mqg
