#include "mqg/band_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mqg/errors.hpp"

namespace mqg {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

struct Sample {
  double z;
  double g;  // |theta*| - 2
};

void validate_options(const BandOptions& o) {
  auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
  if (!positive(o.grid_density)) throw ValidationError("grid density must be positive");
  if (!positive(o.edge_tol)) throw ValidationError("edge tolerance must be positive");
  if (!positive(o.exclusion_halfwidth) || !positive(o.origin_halfwidth)) {
    throw ValidationError("exclusion half-widths must be positive");
  }
  if (!positive(o.imag_tol) || !positive(o.ring_tol)) throw ValidationError("tolerances must be positive");
}

double window_halfwidth(double point, const BandOptions& o) {
  return point == 0.0 ? o.origin_halfwidth : o.exclusion_halfwidth;
}

double energy_of(Regime regime, double z) { return regime == Regime::positive ? z * z : -z * z; }

Band make_band(Regime regime, double z_lo, double z_hi) {
  const double a = energy_of(regime, z_lo);
  const double b = energy_of(regime, z_hi);
  return {z_lo, z_hi, std::min(a, b), std::max(a, b)};
}

// |theta*| - 2 for the band decision. A point that failed to collapse is only
// fatal when it could flip the decision.
double checked_excess(BandFunction& f, Regime regime, double z) {
  const Probe p = f.probe(SpectralParameter(regime, z));
  if (p.status == ProbeStatus::non_collapse && std::abs(p.theta_star) < 10.0) {
    std::ostringstream msg;
    msg << "non-collapse at z = " << z << ": |Im theta*| = " << p.imag_residual << " for theta* = " << p.theta_star;
    throw NonCollapseError(msg.str());
  }
  return p.excess();
}

// g on [a, b] sampled at `intervals` equal steps, both ends included.
void sample_uniform(BandFunction& f, Regime regime, double a, double b, int intervals,
                    std::vector<Sample>& out) {
  for (int j = 0; j <= intervals; ++j) {
    const double z = j == intervals ? b : a + (b - a) * j / intervals;
    out.push_back({z, checked_excess(f, regime, z)});
  }
}

}  // namespace

double Probe::excess() const {
  if (status == ProbeStatus::singular_ring) return inf;
  return std::abs(theta_star) - 2.0;
}

bool in_exclusion_window(const SpectralParameter& z, const BandOptions& options) {
  const double v = z.value();
  const double halfwidth = options.exclusion_halfwidth;
  if (v <= options.origin_halfwidth) return true;
  if (z.regime() == Regime::negative) return false;
  if (std::abs(v - 1.0) <= halfwidth) return true;
  const double n = std::round(v / pi);
  return n >= 1.0 && std::abs(v - n * pi) <= halfwidth;
}

std::vector<double> singular_points(Regime regime, double lo, double hi) {
  std::vector<double> pts;
  if (regime == Regime::negative) {
    if (lo <= 0.0 && hi >= 0.0) pts.push_back(0.0);
    return pts;
  }
  if (lo <= 0.0 && hi >= 0.0) pts.push_back(0.0);
  if (lo <= 1.0 && hi >= 1.0) pts.push_back(1.0);
  for (long n = std::max(1L, static_cast<long>(std::ceil(lo / pi))); n * pi <= hi; ++n) {
    if (n * pi >= lo) pts.push_back(n * pi);
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

BandFunction::BandFunction(const FluxRatio& flux, BandOptions options)
    : flux_(flux), options_(options), evaluator_(build_layout(flux)) {
  validate_options(options_);
}

Probe BandFunction::probe(const SpectralParameter& z) {
  const LogDet dp = evaluator_.log_det(z, cdouble{1.0, 0.0}, cdouble{1.0, 0.0});
  const LogDet d0 = evaluator_.log_det(z, cdouble{0.0, 0.0}, cdouble{1.0, 0.0});
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  // s = 0: the determinant does not depend on the quasimomentum.
  if (d0.singular()) return {ProbeStatus::singular_ring, nan, 0.0, 0.0};
  if (dp.singular()) return {ProbeStatus::ok, 2.0, 0.0, 1.0};

  const double dl = dp.log_magnitude - d0.log_magnitude - std::log(2.0);
  const double dphi = dp.phase - d0.phase;
  if (dl > 700.0) return {ProbeStatus::singular_ring, nan, 0.0, 0.0};
  const cdouble x = std::polar(std::exp(dl), dphi);
  const double theta = 2.0 - x.real();
  const double imag = std::abs(x.imag());
  const double ring = 4.0 / std::abs(cdouble{theta + 2.0, x.imag()});
  if (ring < options_.ring_tol) return {ProbeStatus::singular_ring, nan, 0.0, ring};
  const bool collapsed = imag <= std::max(1.0, std::abs(theta)) * options_.imag_tol;
  return {collapsed ? ProbeStatus::ok : ProbeStatus::non_collapse, theta, imag, ring};
}

BandFunctionSample BandFunction::operator()(const SpectralParameter& z) {
  if (in_exclusion_window(z, options_)) {
    std::ostringstream msg;
    msg << "spectral parameter " << z.value() << " lies inside an exclusion window";
    throw ValidationError(msg.str());
  }
  const Probe p = probe(z);
  if (p.status == ProbeStatus::singular_ring) {
    std::ostringstream msg;
    msg << "singular ring at z = " << z.value()
        << ": the determinant does not depend on the quasimomentum; treat the point with the "
           "exclusion-window policy";
    throw SingularRingError(msg.str());
  }
  if (p.status == ProbeStatus::non_collapse) {
    std::ostringstream msg;
    msg << "non-collapse at z = " << z.value() << ": |Im theta*| = " << p.imag_residual
        << " for theta* = " << p.theta_star;
    throw NonCollapseError(msg.str());
  }
  return {z, p.theta_star, p.imag_residual};
}

BandFunctionSample band_function(const SpectralParameter& z, const FluxRatio& flux,
                                 const BandOptions& options) {
  BandFunction f(flux, options);
  return f(z);
}

double refine_edge(double z_a, double z_b, BandFunction& f, Regime regime, double tol) {
  if (!(tol > 0.0)) throw ValidationError("refine_edge: tolerance must be positive");
  double lo = std::min(z_a, z_b);
  double hi = std::max(z_a, z_b);
  double g_lo = checked_excess(f, regime, lo);
  const double g_hi = checked_excess(f, regime, hi);
  if ((g_lo <= 0.0) == (g_hi <= 0.0)) {
    std::ostringstream msg;
    msg << "refine_edge: no sign change of |theta*| - 2 on [" << lo << ", " << hi << "]";
    throw ValidationError(msg.str());
  }
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = checked_excess(f, regime, mid);
    if ((g_mid <= 0.0) == (g_lo <= 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double refine_edge(double z_a, double z_b, const FluxRatio& flux, Regime regime, double tol,
                   const BandOptions& options) {
  BandFunction f(flux, options);
  return refine_edge(z_a, z_b, f, regime, tol);
}

BandSet scan_window(const FluxRatio& flux, Regime regime, double lo, double hi,
                    const BandOptions& options) {
  validate_options(options);
  if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw ValidationError("scan range must satisfy 0 <= lo < hi < inf");
  }
  const double reach = std::max(options.exclusion_halfwidth, options.origin_halfwidth);
  const double step = 1.0 / options.grid_density;

  // Cut the range at the singular points of s.
  const std::vector<double> sing = singular_points(regime, std::max(0.0, lo - reach), hi + reach);
  for (std::size_t i = 1; i < sing.size(); ++i) {
    if (step > 0.25 * (sing[i] - sing[i - 1])) {
      throw ValidationError("grid too coarse to separate the singular points of the band function");
    }
  }
  struct Segment {
    double a, b;
  };
  std::vector<Segment> segments;
  {
    double a = lo;
    for (double s : sing) {
      const double eps = window_halfwidth(s, options);
      if (s - eps > a) segments.push_back({a, std::min(hi, s - eps)});
      a = std::max(a, s + eps);
    }
    if (hi > a) segments.push_back({a, hi});
  }

  BandFunction f(flux, options);
  BandSet out{flux, regime, {}, options.edge_tol, lo, hi};
  std::vector<Band> raw;  // in z, ascending

  for (const Segment& seg : segments) {
    const int intervals = std::max(2, static_cast<int>(std::ceil((seg.b - seg.a) * options.grid_density)));
    std::vector<Sample> coarse;
    coarse.reserve(intervals + 1);
    sample_uniform(f, regime, seg.a, seg.b, intervals, coarse);

    // Near-touching extrema are resampled on a 10x denser local grid.
    std::vector<Sample> samples;
    samples.reserve(coarse.size());
    samples.push_back(coarse.front());
    for (std::size_t j = 1; j + 1 < coarse.size(); ++j) {
      const double gp = coarse[j - 1].g;
      const double g = coarse[j].g;
      const double gn = coarse[j + 1].g;
      const bool dip = g > 0.0 && g <= gp && g <= gn && g < options.touch_threshold;
      const bool bump = g <= 0.0 && g >= gp && g >= gn && g > -options.touch_threshold;
      if (dip || bump) {
        ++out.refined_extrema;
        std::vector<Sample> dense;
        sample_uniform(f, regime, coarse[j - 1].z, coarse[j + 1].z, 20, dense);
        samples.insert(samples.end(), dense.begin() + 1, dense.end() - 1);
      } else {
        samples.push_back(coarse[j]);
      }
    }
    samples.push_back(coarse.back());
    std::sort(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) { return x.z < y.z; });
    samples.erase(std::unique(samples.begin(), samples.end(),
                              [](const Sample& x, const Sample& y) { return x.z == y.z; }),
                  samples.end());

    // Lower edge of the band currently open, NaN when outside a band.
    double open = samples.front().g <= 0.0 ? samples.front().z : std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j + 1 < samples.size(); ++j) {
      const bool in_a = samples[j].g <= 0.0;
      const bool in_b = samples[j + 1].g <= 0.0;
      if (in_a == in_b) continue;
      const double edge = refine_edge(samples[j].z, samples[j + 1].z, f, regime, options.edge_tol);
      if (in_b) {
        open = edge;
      } else {
        raw.push_back(make_band(regime, open, edge));
        open = std::numeric_limits<double>::quiet_NaN();
      }
    }
    if (!std::isnan(open)) raw.push_back(make_band(regime, open, samples.back().z));
  }

  // A band reaching both sides of an exclusion window continues through it iff
  // the probes at distance 2*eps on both sides are in the band.
  std::vector<Band> merged;
  for (const Band& b : raw) {
    if (!merged.empty()) {
      Band& prev = merged.back();
      const double gap = b.z_lo - prev.z_hi;
      bool join = false;
      if (gap <= options.edge_tol) {
        join = true;
        prev.touching = true;
        ++out.touching_merges;
      } else {
        for (double s : sing) {
          const double eps = window_halfwidth(s, options);
          if (std::abs(prev.z_hi - (s - eps)) < 0.5 * eps && std::abs(b.z_lo - (s + eps)) < 0.5 * eps) {
            const bool left = s - 2 * eps > 0.0 && f.probe(SpectralParameter(regime, s - 2 * eps)).in_band();
            const bool right = f.probe(SpectralParameter(regime, s + 2 * eps)).in_band();
            join = left && right;
          }
        }
      }
      if (join) {
        const bool touching = prev.touching || b.touching;
        prev = make_band(regime, prev.z_lo, b.z_hi);
        prev.touching = touching;
        continue;
      }
    }
    merged.push_back(b);
  }

  out.bands = std::move(merged);
  std::sort(out.bands.begin(), out.bands.end(), [](const Band& a, const Band& b) { return a.e_lo < b.e_lo; });
  return out;
}

BandSet scan_bands(const FluxRatio& flux, Regime regime, double limit, const BandOptions& options) {
  if (!(limit > 0.0)) throw ValidationError("scan limit must be positive");
  return scan_window(flux, regime, 0.0, limit, options);
}

}  // namespace mqg
