#include "mqg/spectral_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mqg/errors.hpp"

namespace mqg {

namespace {

constexpr double pi = std::numbers::pi;

double total_length(const std::vector<Band>& bands) {
  double sum = 0.0;
  for (const Band& b : bands) sum += b.momentum_width();
  return sum;
}

}  // namespace

const char* to_string(BandSpecies s) { return s == BandSpecies::butterfly ? "butterfly" : "non-butterfly"; }

BandSpecies classify_band(const Band& band, int n) {
  return band.momentum_width() < non_butterfly_width_factor / n ? BandSpecies::non_butterfly
                                                                 : BandSpecies::butterfly;
}

WindowMeasure window_measure(const FluxRatio& flux, int n, const BandOptions& options) {
  if (n < 1) throw ValidationError("window index n must be >= 1");
  BandSet set = scan_window(flux, Regime::positive, n * pi, (n + 1) * pi, options);
  const double fraction = total_length(set.bands) / pi;
  return {n, std::move(set), fraction};
}

MeasureReport probability_sigma(const FluxRatio& flux, int n, const BandOptions& options) {
  const WindowMeasure base = window_measure(flux, n, options);
  const WindowMeasure twice = window_measure(flux, 2 * n, options);
  const double p = std::clamp(2.0 * twice.fraction - base.fraction, 0.0, 1.0);
  return {flux,
          n,
          p,
          base.fraction,
          twice.fraction,
          thouless_reference(flux.q()),
          static_cast<int>(base.bands.bands.size())};
}

NarrowBandReport narrow_band_stats(const FluxRatio& flux, int n, const BandOptions& options) {
  if (n < 20) throw ValidationError("narrow-band statistics need n >= 20");
  const double lo = n * pi - 0.5;
  const double hi = n * pi + 0.5;
  const BandSet set = scan_window(flux, Regime::positive, lo, hi, options);

  NarrowBandReport report{flux, n, {}, {}, {}};
  for (const Band& b : set.bands) {
    if (b.z_lo > lo && b.z_hi < hi && classify_band(b, n) == BandSpecies::non_butterfly) {
      report.bands.push_back(b);
    }
  }
  if (report.bands.empty()) {
    throw NoNarrowBandsError("no narrow bands around k = " + std::to_string(n) + "*pi");
  }
  for (std::size_t i = 0; i < report.bands.size(); ++i) {
    report.widths.push_back(report.bands[i].energy_width());
    if (i > 0) report.gaps.push_back(report.bands[i].e_lo - report.bands[i - 1].e_hi);
  }
  return report;
}

AsymptoticProfile asymptotic_band_profile(const FluxRatio& flux, int n, double grid_density,
                                          const BandOptions& options) {
  if (n < 1) throw ValidationError("window index n must be >= 1");
  if (!(grid_density > 0.0)) throw ValidationError("grid density must be positive");
  BandFunction f(flux, options);
  const int count = static_cast<int>(std::ceil(pi * grid_density));
  AsymptoticProfile profile{flux, n, {}};
  profile.samples.reserve(count);
  for (int j = 0; j < count; ++j) {
    const double offset = (j + 0.5) * pi / count;
    const SpectralParameter z = SpectralParameter::positive(n * pi + offset);
    if (in_exclusion_window(z, options)) continue;
    const Probe p = f.probe(z);
    const double theta =
        p.status == ProbeStatus::singular_ring ? std::numeric_limits<double>::infinity() : p.theta_star;
    profile.samples.push_back({offset, theta, p.in_band()});
  }
  return profile;
}

double non_butterfly_measure(const FluxRatio& flux, int n, const BandOptions& options) {
  const WindowMeasure magnetic = window_measure(flux, n, options);
  const WindowMeasure plain = window_measure(FluxRatio::baseline(), n, options);
  // Length of each magnetic band minus its overlap with the baseline bands.
  double measure = 0.0;
  for (const Band& b : magnetic.bands.bands) {
    double covered = 0.0;
    for (const Band& c : plain.bands.bands) {
      covered += std::max(0.0, std::min(b.z_hi, c.z_hi) - std::max(b.z_lo, c.z_lo));
    }
    measure += b.momentum_width() - covered;
  }
  return measure;
}

double thouless_reference(int q) {
  if (q < 2) throw ValidationError("Thouless reference needs q >= 2");
  return 4.0 * catalan_constant / (pi * q);
}

std::vector<double> star_graph_negative_eigenvalues(int n_edges) {
  if (n_edges < 3) throw ValidationError("star graph needs N >= 3 edges");
  const int m_max = n_edges % 2 == 1 ? n_edges / 2 : (n_edges - 1) / 2;
  std::vector<double> out;
  for (int m = 1; m <= m_max; ++m) {
    const double t = std::tan(m * pi / n_edges);
    out.push_back(-t * t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mqg
