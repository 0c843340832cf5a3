#pragma once

#include <vector>

#include "mqg/band_engine.hpp"
#include "mqg/core_model.hpp"

namespace mqg {

/// Catalan's constant, sum_{n>=0} (-1)^n / (2n+1)^2.
inline constexpr double catalan_constant = 0.91596559417721901505;

/// Bands of width below `non_butterfly_width_factor / n` in k are non-butterfly.
inline constexpr double non_butterfly_width_factor = 5.0;

enum class BandSpecies { butterfly, non_butterfly };

const char* to_string(BandSpecies s);

/// Width classifier for bands in the period window of index n.
BandSpecies classify_band(const Band& band, int n);

/// Positive bands of the period window (n*pi, (n+1)*pi).
struct WindowMeasure {
  int n;
  BandSet bands;
  /// Total k-length of the bands divided by pi.
  double fraction;
};

WindowMeasure window_measure(const FluxRatio& flux, int n, const BandOptions& options = {});

/// Probability that a random momentum lies in the spectrum.
///
/// The band fraction of a single period window drifts as a/n with the window
/// index, so the reported value is the Richardson estimate
/// 2 * fraction(2n) - fraction(n). Both raw window fractions are kept.
struct MeasureReport {
  FluxRatio flux;
  int n;
  double p_sigma;
  double window_fraction;         // at n
  double window_fraction_double;  // at 2n
  double thouless_ref;
  int band_count_in_window;       // at n
};

MeasureReport probability_sigma(const FluxRatio& flux, int n, const BandOptions& options = {});

/// Narrow bands around k = n*pi (|k - n*pi| < 1/2), in ascending energy.
struct NarrowBandReport {
  FluxRatio flux;
  int n;
  std::vector<Band> bands;
  std::vector<double> widths;  // k_hi^2 - k_lo^2
  std::vector<double> gaps;    // between consecutive narrow bands
};

NarrowBandReport narrow_band_stats(const FluxRatio& flux, int n, const BandOptions& options = {});

struct ProfileSample {
  double k_offset;  // k - n*pi, in (0, pi)
  double theta_star;  // +inf where the determinant ratio is numerically 1
  bool in_band;
};

/// Band function sampled over one period (n*pi, (n+1)*pi). For large n the
/// membership pattern approaches the asymptotic butterfly shape.
struct AsymptoticProfile {
  FluxRatio flux;
  int n;
  std::vector<ProfileSample> samples;
};

AsymptoticProfile asymptotic_band_profile(const FluxRatio& flux, int n, double grid_density,
                                          const BandOptions& options = {});

/// k-measure of the bands of `flux` lying in the gaps of the non-magnetic
/// lattice inside the window (n*pi, (n+1)*pi).
double non_butterfly_measure(const FluxRatio& flux, int n, const BandOptions& options = {});

/// Normalised Thouless total-bandwidth value 4 C / (pi q).
double thouless_reference(int q);

/// Negative eigenvalues -tan^2(m*pi/N) of the star graph with N half-lines
/// and circulant coupling, ascending.
std::vector<double> star_graph_negative_eigenvalues(int n_edges);

}  // namespace mqg
