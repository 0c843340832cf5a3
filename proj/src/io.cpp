#include "mqg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "mqg/errors.hpp"

namespace mqg::io {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fixed_with(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", std::max(decimals, 0), x);
  return buf;
}

int decimal_exponent(double x) { return static_cast<int>(std::floor(std::log10(std::fabs(x)))); }

// Value as it appears on the wire.
double wire(double x) { return std::stod(format_fixed(x)); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int parse_int(const std::string& s, int line_no) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw IoError("line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return v;
}

double parse_real(const std::string& s, int line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw IoError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

ordered_json metadata_object(const DatasetMetadata& meta) {
  ordered_json j;
  j["command"] = meta.command;
  j["engine_version"] = engine_version;
  j["grid_density"] = meta.grid_density;
  j["edge_tol"] = meta.edge_tol;
  j["imag_tol"] = meta.imag_tol;
  j["exclusion_halfwidth"] = meta.exclusion_halfwidth;
  if (meta.kmax > 0.0) j["kmax"] = meta.kmax;
  if (meta.kappa_max > 0.0) {
    j["kappa_max"] = meta.kappa_max;
    j["kappa_max_caveat"] =
        "empirical upper bound on kappa; negative bands beyond it are not searched";
  }
  if (meta.n > 0) j["n"] = meta.n;
  j["notes"] = meta.notes;
  return j;
}

// SVG canvas.
constexpr double svg_width = 900.0;
constexpr double svg_height = 600.0;
constexpr double margin = 50.0;

std::string coord(double v) { return fixed_with(v, 2); }

struct Segment {
  double x0, x1, y;
};

std::string render(const std::vector<Segment>& segments, double x_min, double x_max,
                   const std::string& x_label) {
  const double plot_w = svg_width - 2 * margin;
  const double plot_h = svg_height - 2 * margin;
  auto sx = [&](double x) { return margin + plot_w * (x - x_min) / (x_max - x_min); };
  auto sy = [&](double y) { return svg_height - margin - plot_h * y; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_width << "\" height=\"" << svg_height
     << "\" viewBox=\"0 0 " << svg_width << ' ' << svg_height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<text x=\"" << svg_width / 2 << "\" y=\"" << svg_height - 12
     << "\" font-size=\"14\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text x=\"14\" y=\"" << svg_height / 2 << "\" font-size=\"14\" text-anchor=\"middle\" "
     << "transform=\"rotate(-90 14 " << svg_height / 2 << ")\">p/q</text>\n";
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    os << "<text x=\"" << margin - 6 << "\" y=\"" << coord(sy(tick) + 4)
       << "\" font-size=\"11\" text-anchor=\"end\">" << tick << "</text>\n";
  }
  os << "<g stroke=\"black\" stroke-width=\"1.5\">\n";
  for (const Segment& s : segments) {
    const double a = std::clamp(s.x0, x_min, x_max);
    const double b = std::clamp(s.x1, x_min, x_max);
    if (b <= a) continue;
    // Keep very narrow bands visible.
    const double xa = sx(a);
    const double xb = std::max(sx(b), xa + 0.5);
    os << "<line x1=\"" << coord(xa) << "\" y1=\"" << coord(sy(s.y)) << "\" x2=\"" << coord(xb)
       << "\" y2=\"" << coord(sy(s.y)) << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace

std::string format_fixed(double x) {
  if (x == 0.0 || !std::isfinite(x)) return fixed_with(x == 0.0 ? 0.0 : x, 11);
  const int e = decimal_exponent(x);
  std::string s = fixed_with(x, 11 - e);
  // Rounding may carry into the next decade, e.g. 9.9999999999996 -> 10.0...
  const double y = std::stod(s);
  if (y != 0.0 && decimal_exponent(y) != e) s = fixed_with(y, 11 - decimal_exponent(y));
  if (s.find_first_not_of("-0.") == std::string::npos) s = fixed_with(0.0, 11);
  return s;
}

std::vector<BandRow> band_rows(const BandSet& set) {
  std::vector<BandRow> rows;
  int index = 1;
  for (const Band& b : set.bands) {
    rows.push_back({set.flux.p(), set.flux.q(), set.regime, index++, b.e_lo, b.e_hi});
  }
  return rows;
}

void sort_rows(std::vector<BandRow>& rows) {
  auto key = [](const BandRow& r) {
    return std::make_tuple(r.q, r.p, r.regime == Regime::negative ? 0 : 1, r.band_index);
  };
  std::sort(rows.begin(), rows.end(), [&](const BandRow& a, const BandRow& b) { return key(a) < key(b); });
}

void write_band_csv(std::ostream& os, const std::vector<BandRow>& rows) {
  os << "p,q,regime,band_index,e_lo,e_hi\n";
  for (const BandRow& r : rows) {
    os << r.p << ',' << r.q << ',' << to_string(r.regime) << ',' << r.band_index << ','
       << format_fixed(r.e_lo) << ',' << format_fixed(r.e_hi) << '\n';
  }
}

std::vector<BandRow> read_band_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "p,q,regime,band_index,e_lo,e_hi") {
    throw IoError("missing band CSV header");
  }
  std::vector<BandRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 6) throw IoError("line " + std::to_string(line_no) + ": expected 6 fields");
    Regime regime;
    try {
      regime = parse_regime(cells[2]);
    } catch (const ValidationError& e) {
      throw IoError("line " + std::to_string(line_no) + ": " + e.what());
    }
    rows.push_back({parse_int(cells[0], line_no), parse_int(cells[1], line_no), regime,
                    parse_int(cells[3], line_no), parse_real(cells[4], line_no),
                    parse_real(cells[5], line_no)});
  }
  return rows;
}

BandSet band_set_from_rows(const std::vector<BandRow>& rows, const FluxRatio& flux, Regime regime) {
  BandSet set{flux, regime, {}, 0.0, 0.0, 0.0};
  for (const BandRow& r : rows) {
    if (r.p != flux.p() || r.q != flux.q() || r.regime != regime) continue;
    Band b{};
    b.e_lo = r.e_lo;
    b.e_hi = r.e_hi;
    if (regime == Regime::positive) {
      b.z_lo = std::sqrt(r.e_lo);
      b.z_hi = std::sqrt(r.e_hi);
    } else {
      b.z_lo = std::sqrt(-r.e_hi);
      b.z_hi = std::sqrt(-r.e_lo);
    }
    set.bands.push_back(b);
  }
  std::sort(set.bands.begin(), set.bands.end(), [](const Band& a, const Band& b) { return a.e_lo < b.e_lo; });
  if (!set.bands.empty()) {
    set.z_min = regime == Regime::positive ? set.bands.front().z_lo : set.bands.back().z_lo;
    set.z_max = regime == Regime::positive ? set.bands.back().z_hi : set.bands.front().z_hi;
  }
  return set;
}

std::string metadata_json(const DatasetMetadata& meta) { return metadata_object(meta).dump(2) + "\n"; }

std::string band_json(const std::vector<BandRow>& rows, const DatasetMetadata& meta) {
  ordered_json j;
  j["metadata"] = metadata_object(meta);
  ordered_json arr = ordered_json::array();
  for (const BandRow& r : rows) {
    arr.push_back({{"p", r.p},
                   {"q", r.q},
                   {"regime", to_string(r.regime)},
                   {"band_index", r.band_index},
                   {"e_lo", wire(r.e_lo)},
                   {"e_hi", wire(r.e_hi)}});
  }
  j["bands"] = std::move(arr);
  return j.dump(2) + "\n";
}

ProbRow prob_row(const MeasureReport& report) {
  return {report.flux.p(), report.flux.q(),        report.p_sigma,
          report.thouless_ref, report.n, report.window_fraction,
          report.window_fraction_double};
}

void write_prob_csv(std::ostream& os, const std::vector<ProbRow>& rows) {
  os << "p,q,p_sigma,thouless_ref,n\n";
  for (const ProbRow& r : rows) {
    os << r.p << ',' << r.q << ',' << format_fixed(r.p_sigma) << ',' << format_fixed(r.thouless_ref) << ','
       << r.n << '\n';
  }
}

std::string prob_json(const std::vector<ProbRow>& rows, const DatasetMetadata& meta) {
  ordered_json j;
  j["metadata"] = metadata_object(meta);
  ordered_json arr = ordered_json::array();
  for (const ProbRow& r : rows) {
    arr.push_back({{"p", r.p},
                   {"q", r.q},
                   {"p_sigma", wire(r.p_sigma)},
                   {"thouless_ref", wire(r.thouless_ref)},
                   {"n", r.n},
                   {"window_fraction", wire(r.window_fraction)},
                   {"window_fraction_double", wire(r.window_fraction_double)}});
  }
  j["rows"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::vector<WindowRow> window_rows(const BandSet& set, int n) {
  const double origin = n * std::numbers::pi;
  std::vector<WindowRow> rows;
  int index = 1;
  for (const Band& b : set.bands) {
    rows.push_back({set.flux.p(), set.flux.q(), n, index++, b.z_lo - origin, b.z_hi - origin,
                    classify_band(b, n)});
  }
  return rows;
}

void write_window_csv(std::ostream& os, const std::vector<WindowRow>& rows) {
  os << "p,q,n,band_index,k_lo,k_hi,species\n";
  for (const WindowRow& r : rows) {
    os << r.p << ',' << r.q << ',' << r.n << ',' << r.band_index << ',' << format_fixed(r.k_lo) << ','
       << format_fixed(r.k_hi) << ',' << to_string(r.species) << '\n';
  }
}

std::string window_json(const std::vector<WindowRow>& rows, const DatasetMetadata& meta) {
  ordered_json j;
  j["metadata"] = metadata_object(meta);
  ordered_json arr = ordered_json::array();
  for (const WindowRow& r : rows) {
    arr.push_back({{"p", r.p},
                   {"q", r.q},
                   {"n", r.n},
                   {"band_index", r.band_index},
                   {"k_lo", wire(r.k_lo)},
                   {"k_hi", wire(r.k_hi)},
                   {"species", to_string(r.species)}});
  }
  j["windows"] = std::move(arr);
  return j.dump(2) + "\n";
}

void write_star_csv(std::ostream& os, int n_edges, const std::vector<double>& energies) {
  os << "n_edges,index,energy\n";
  for (std::size_t i = 0; i < energies.size(); ++i) {
    os << n_edges << ',' << i + 1 << ',' << format_fixed(energies[i]) << '\n';
  }
}

std::string butterfly_svg(const std::vector<BandRow>& rows, double e_min, double e_max) {
  if (!(e_max > e_min)) throw ValidationError("empty energy range for the plot");
  std::vector<Segment> segments;
  for (const BandRow& r : rows) {
    if (r.q == 1) {
      segments.push_back({r.e_lo, r.e_hi, 0.0});
      segments.push_back({r.e_lo, r.e_hi, 1.0});
    } else {
      segments.push_back({r.e_lo, r.e_hi, static_cast<double>(r.p) / r.q});
    }
  }
  return render(segments, e_min, e_max, "energy");
}

std::string window_svg(const std::vector<WindowRow>& rows) {
  std::vector<Segment> segments;
  for (const WindowRow& r : rows) {
    if (r.q == 1) {
      segments.push_back({r.k_lo, r.k_hi, 0.0});
      segments.push_back({r.k_lo, r.k_hi, 1.0});
    } else {
      segments.push_back({r.k_lo, r.k_hi, static_cast<double>(r.p) / r.q});
    }
  }
  return render(segments, 0.0, std::numbers::pi, "k - n*pi");
}

void write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path target(path);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + target.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("write to " + path + " failed");
}

}  // namespace mqg::io
