#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mqg/band_engine.hpp"
#include "mqg/spectral_analysis.hpp"

namespace mqg::io {

inline constexpr const char* engine_version = "0.3.0";

/// Canonical wire format of a real number: fixed point with 12 significant
/// digits. format_fixed(parse(format_fixed(x))) == format_fixed(x).
std::string format_fixed(double x);

/// One line of the band CSV `p,q,regime,band_index,e_lo,e_hi`.
struct BandRow {
  int p;
  int q;
  Regime regime;
  int band_index;  // 1-based, ascending energy within (p, q, regime)
  double e_lo;
  double e_hi;
};

std::vector<BandRow> band_rows(const BandSet& set);

/// Rows sorted by (q, p, regime with negative first, band_index).
void sort_rows(std::vector<BandRow>& rows);

void write_band_csv(std::ostream& os, const std::vector<BandRow>& rows);
/// Throws IoError on a malformed header or line.
std::vector<BandRow> read_band_csv(std::istream& is);

/// Rebuilds the band set of one (p, q, regime) group from rows. Momenta are
/// recovered from the energies.
BandSet band_set_from_rows(const std::vector<BandRow>& rows, const FluxRatio& flux, Regime regime);

/// Settings that produced a dataset. Written to the sidecar file of CSV output
/// and inline in JSON output.
struct DatasetMetadata {
  std::string command;
  double grid_density = 0.0;
  double edge_tol = 0.0;
  double imag_tol = 0.0;
  double exclusion_halfwidth = 0.0;
  double kmax = 0.0;
  double kappa_max = 0.0;  // 0 when the negative regime was not scanned
  int n = 0;               // window index, 0 when unused
  std::vector<std::string> notes;
};

std::string metadata_json(const DatasetMetadata& meta);
std::string band_json(const std::vector<BandRow>& rows, const DatasetMetadata& meta);

/// Line of the probability CSV `p,q,p_sigma,thouless_ref,n`.
struct ProbRow {
  int p;
  int q;
  double p_sigma;
  double thouless_ref;
  int n;
  double window_fraction;
  double window_fraction_double;
};

ProbRow prob_row(const MeasureReport& report);
void write_prob_csv(std::ostream& os, const std::vector<ProbRow>& rows);
std::string prob_json(const std::vector<ProbRow>& rows, const DatasetMetadata& meta);

/// Band intervals of one period window, in offsets k - n*pi.
struct WindowRow {
  int p;
  int q;
  int n;
  int band_index;
  double k_lo;
  double k_hi;
  BandSpecies species;
};

std::vector<WindowRow> window_rows(const BandSet& set, int n);
void write_window_csv(std::ostream& os, const std::vector<WindowRow>& rows);
std::string window_json(const std::vector<WindowRow>& rows, const DatasetMetadata& meta);

/// `n_edges,index,energy` for star-graph eigenvalues.
void write_star_csv(std::ostream& os, int n_edges, const std::vector<double>& energies);

/// Butterfly plot: one horizontal segment per band at ordinate p/q. Baseline
/// rows (q = 1) are drawn at ordinates 0 and 1.
std::string butterfly_svg(const std::vector<BandRow>& rows, double e_min, double e_max);
/// Same layout for period-window intervals, abscissa k - n*pi in (0, pi).
std::string window_svg(const std::vector<WindowRow>& rows);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_file(const std::string& path, const std::string& content);

}  // namespace mqg::io
