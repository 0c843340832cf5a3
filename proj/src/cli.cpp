#include "mqg/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mqg/band_engine.hpp"
#include "mqg/core_model.hpp"
#include "mqg/errors.hpp"
#include "mqg/io.hpp"
#include "mqg/spectral_analysis.hpp"

namespace mqg::cli {

namespace {

constexpr int soft_qmax = 12;

struct RunConfig {
  std::string subcommand;
  int p = 0;
  int q = 0;
  bool has_p = false;
  bool has_q = false;
  int qmax = 0;
  double kmax = 20.0;
  double emax = 0.0;
  bool neg = false;
  double kappa_max = default_kappa_max;
  double grid = BandOptions{}.grid_density;
  double tol = BandOptions{}.edge_tol;
  int n = 50;
  bool asymptotic = false;
  bool svg = false;
  std::string out;
  std::string format = "csv";
  int jobs = 1;
  int degree = 4;

  BandOptions band_options() const {
    BandOptions o;
    o.grid_density = grid;
    o.edge_tol = tol;
    return o;
  }

  io::DatasetMetadata metadata() const {
    const BandOptions o = band_options();
    io::DatasetMetadata m;
    m.command = subcommand;
    m.grid_density = o.grid_density;
    m.edge_tol = o.edge_tol;
    m.imag_tol = o.imag_tol;
    m.exclusion_halfwidth = o.exclusion_halfwidth;
    return m;
  }
};

/// Runs `task(i)` for i in [0, count) on `jobs` threads. Results are stored by
/// the caller per index, so the schedule never shows in the output. The first
/// failing index (in index order) is rethrown.
template <class Task>
void parallel_for(std::size_t count, int jobs, Task task) {
  std::vector<std::exception_ptr> failures(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

void validate(const RunConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be positive");
  };
  positive(c.kmax, "--kmax");
  positive(c.kappa_max, "--kappa-max");
  positive(c.grid, "--grid");
  positive(c.tol, "--tol");
  if (c.emax != 0.0) positive(c.emax, "--emax");
  if (c.n < 1) throw ValidationError("--n must be positive");
  if (c.jobs < 1) throw ValidationError("--jobs must be positive");
  if (c.has_q && c.q < 1) throw ValidationError("--q must be positive");
  if (c.has_p && c.p < 0) throw ValidationError("--p must be non-negative");
  if (c.format != "csv" && c.format != "json" && c.format != "svg") {
    throw ValidationError("--format must be csv, json or svg");
  }
}

/// Output path without extension.
std::string output_stem(const RunConfig& c, const std::string& default_name) {
  if (!c.out.empty()) {
    std::filesystem::path p(c.out);
    if (p.has_extension()) p.replace_extension();
    return p.string();
  }
  const char* dir = std::getenv(output_dir_env);
  std::filesystem::path base = dir && *dir ? std::filesystem::path(dir) : std::filesystem::path(".");
  return (base / default_name).string();
}

/// Writes the data file and, for CSV, the metadata sidecar.
template <class CsvWriter>
void write_dataset(const std::string& stem, const RunConfig& c, CsvWriter csv, const std::string& json,
                   const io::DatasetMetadata& meta, std::ostream& err) {
  if (c.format == "json") {
    io::write_file(stem + ".json", json);
    err << "wrote " << stem << ".json\n";
    return;
  }
  std::ostringstream os;
  csv(os);
  io::write_file(stem + ".csv", os.str());
  io::write_file(stem + ".csv.meta.json", io::metadata_json(meta));
  err << "wrote " << stem << ".csv\n";
}

double upper_k(const RunConfig& c) { return c.emax > 0.0 ? std::sqrt(c.emax) : c.kmax; }

std::vector<io::BandRow> compute_bands(const std::vector<FluxRatio>& fluxes, const RunConfig& c) {
  struct Task {
    FluxRatio flux;
    Regime regime;
  };
  std::vector<Task> tasks;
  for (const FluxRatio& f : fluxes) {
    tasks.push_back({f, Regime::positive});
    if (c.neg && !f.is_baseline()) tasks.push_back({f, Regime::negative});
  }
  std::vector<std::vector<io::BandRow>> results(tasks.size());
  const BandOptions options = c.band_options();
  const double kmax = upper_k(c);
  parallel_for(tasks.size(), c.jobs, [&](std::size_t i) {
    const double limit = tasks[i].regime == Regime::positive ? kmax : c.kappa_max;
    results[i] = io::band_rows(scan_bands(tasks[i].flux, tasks[i].regime, limit, options));
  });
  std::vector<io::BandRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  io::sort_rows(rows);
  return rows;
}

std::vector<io::WindowRow> compute_windows(const std::vector<FluxRatio>& fluxes, const RunConfig& c) {
  std::vector<std::vector<io::WindowRow>> results(fluxes.size());
  const BandOptions options = c.band_options();
  const double lo = c.n * std::numbers::pi;
  parallel_for(fluxes.size(), c.jobs, [&](std::size_t i) {
    results[i] = io::window_rows(scan_window(fluxes[i], Regime::positive, lo, lo + std::numbers::pi, options), c.n);
  });
  std::vector<io::WindowRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

void add_regime_metadata(io::DatasetMetadata& meta, const RunConfig& c) {
  meta.kmax = upper_k(c);
  if (c.neg) {
    meta.kappa_max = c.kappa_max;
    meta.notes.push_back("negative bands searched for kappa in (0, kappa_max]");
  }
}

int cmd_bands(const RunConfig& c, std::ostream& err) {
  if (!c.has_p || !c.has_q) throw ValidationError("bands needs --p and --q");
  const FluxRatio flux = c.p == 0 && c.q == 1 ? FluxRatio::baseline() : make_flux(c.p, c.q);
  const auto rows = compute_bands({flux}, c);
  io::DatasetMetadata meta = c.metadata();
  add_regime_metadata(meta, c);
  const std::string stem =
      output_stem(c, "bands_p" + std::to_string(c.p) + "_q" + std::to_string(c.q));
  if (c.format == "svg") {
    io::write_file(stem + ".svg", io::butterfly_svg(rows, rows.empty() ? 0.0 : rows.front().e_lo,
                                                    upper_k(c) * upper_k(c)));
    return exit_ok;
  }
  write_dataset(stem, c, [&](std::ostream& os) { io::write_band_csv(os, rows); }, io::band_json(rows, meta),
                meta, err);
  return exit_ok;
}

int cmd_butterfly(const RunConfig& c, std::ostream& err) {
  const int qmax = c.qmax > 0 ? c.qmax : soft_qmax;
  if (qmax < 2) throw ValidationError("--qmax must be at least 2");
  if (qmax > soft_qmax) {
    err << "warning: --qmax " << qmax << " exceeds " << soft_qmax << "; runtime grows quickly\n";
  }
  const std::vector<FluxRatio> fluxes = coprime_ratios(qmax);
  const std::string stem = output_stem(c, "butterfly_qmax" + std::to_string(qmax));
  io::DatasetMetadata meta = c.metadata();
  add_regime_metadata(meta, c);

  const auto rows = compute_bands(fluxes, c);
  if (c.format != "svg") {
    write_dataset(stem, c, [&](std::ostream& os) { io::write_band_csv(os, rows); }, io::band_json(rows, meta),
                  meta, err);
  }

  std::vector<io::WindowRow> windows;
  if (c.asymptotic) {
    windows = compute_windows(fluxes, c);
    io::DatasetMetadata wmeta = c.metadata();
    wmeta.n = c.n;
    wmeta.notes.push_back("k_lo and k_hi are offsets k - n*pi");
    if (c.format != "svg") {
      RunConfig wc = c;
      write_dataset(stem + ".asymptotic", wc, [&](std::ostream& os) { io::write_window_csv(os, windows); },
                    io::window_json(windows, wmeta), wmeta, err);
    }
  }

  if (c.svg || c.format == "svg") {
    std::string svg;
    if (c.asymptotic) {
      auto plotted = windows;
      for (const auto& r : compute_windows({FluxRatio::baseline()}, c)) plotted.push_back(r);
      svg = io::window_svg(plotted);
    } else {
      auto plotted = rows;
      RunConfig base = c;
      base.neg = false;
      for (const auto& r : compute_bands({FluxRatio::baseline()}, base)) plotted.push_back(r);
      double e_min = 0.0;
      for (const auto& r : plotted) e_min = std::min(e_min, r.e_lo);
      svg = io::butterfly_svg(plotted, e_min, upper_k(c) * upper_k(c));
    }
    io::write_file(stem + ".svg", svg);
    err << "wrote " << stem << ".svg\n";
  }
  return exit_ok;
}

int cmd_prob(const RunConfig& c, std::ostream& err) {
  std::vector<FluxRatio> fluxes;
  std::string name;
  if (c.has_q) {
    if (c.q < 2) throw ValidationError("--q must be at least 2");
    if (c.has_p) {
      fluxes.push_back(make_flux(c.p, c.q));
      name = "prob_p" + std::to_string(c.p) + "_q" + std::to_string(c.q);
    } else {
      for (const FluxRatio& f : coprime_ratios(c.q)) {
        if (f.q() == c.q) fluxes.push_back(f);
      }
      name = "prob_q" + std::to_string(c.q);
    }
  } else if (c.qmax > 0) {
    if (c.qmax < 2) throw ValidationError("--qmax must be at least 2");
    fluxes = coprime_ratios(c.qmax);
    name = "prob_qmax" + std::to_string(c.qmax);
  } else {
    throw ValidationError("prob needs --q or --qmax");
  }

  std::vector<io::ProbRow> rows(fluxes.size());
  const BandOptions options = c.band_options();
  parallel_for(fluxes.size(), c.jobs,
               [&](std::size_t i) { rows[i] = io::prob_row(probability_sigma(fluxes[i], c.n, options)); });

  io::DatasetMetadata meta = c.metadata();
  meta.n = c.n;
  meta.notes.push_back("p_sigma = 2*fraction(2n) - fraction(n) over the windows (n*pi, (n+1)*pi)");
  if (c.format == "svg") throw ValidationError("prob has no SVG output");
  write_dataset(output_stem(c, name), c, [&](std::ostream& os) { io::write_prob_csv(os, rows); },
                io::prob_json(rows, meta), meta, err);
  return exit_ok;
}

int cmd_star(const RunConfig& c, std::ostream& err) {
  const auto energies = star_graph_negative_eigenvalues(c.degree);
  if (c.format != "csv") throw ValidationError("star writes CSV only");
  std::ostringstream os;
  io::write_star_csv(os, c.degree, energies);
  const std::string stem = output_stem(c, "star_n" + std::to_string(c.degree));
  io::write_file(stem + ".csv", os.str());
  err << "wrote " << stem << ".csv\n";
  return exit_ok;
}

void add_options(CLI::App& app, RunConfig& c) {
  app.add_option("--p", c.p, "flux numerator");
  app.add_option("--q", c.q, "flux denominator");
  app.add_option("--qmax", c.qmax, "all reduced ratios with q <= qmax");
  app.add_option("--kmax", c.kmax, "upper momentum of the positive scan")->capture_default_str();
  app.add_option("--emax", c.emax, "upper energy of the positive scan (overrides --kmax)");
  app.add_flag("--neg", c.neg, "also scan negative energies");
  app.add_option("--kappa-max", c.kappa_max, "upper decay rate of the negative scan")->capture_default_str();
  app.add_option("--grid", c.grid, "grid samples per unit of k or kappa")->capture_default_str();
  app.add_option("--tol", c.tol, "band edge tolerance")->capture_default_str();
  app.add_option("--n", c.n, "period window index")->capture_default_str();
  app.add_flag("--asymptotic", c.asymptotic, "butterfly: also compute the window at index n");
  app.add_flag("--svg", c.svg, "butterfly: also render an SVG plot");
  app.add_option("--out", c.out, "output file (extension replaced by the format)");
  app.add_option("--format", c.format, "csv, json or svg")->capture_default_str();
  app.add_option("--jobs", c.jobs, "worker threads")->capture_default_str();
  app.add_option("--degree", c.degree, "star: number of half-lines")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Band spectra of the magnetic square-lattice quantum graph", "mqg"};
  RunConfig c;
  bool dump = false;
  add_options(app, c);
  app.set_config("--config", "", "configuration file (TOML or INI)");
  app.add_flag("--dump-config", dump, "print the effective configuration and exit");
  app.require_subcommand(1);
  const std::pair<const char*, const char*> commands[] = {
      {"bands", "band edges for one flux ratio"},
      {"butterfly", "bands for every ratio with q <= qmax"},
      {"prob", "spectral measure P_sigma with the Thouless reference"},
      {"star", "negative eigenvalues of the star graph"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  c.subcommand = app.get_subcommands().front()->get_name();
  c.has_p = app.count("--p") > 0;
  c.has_q = app.count("--q") > 0;

  if (dump) {
    out << app.config_to_str(true, false);
    return exit_ok;
  }

  try {
    validate(c);
    if (c.subcommand == "bands") return cmd_bands(c, err);
    if (c.subcommand == "butterfly") return cmd_butterfly(c, err);
    if (c.subcommand == "prob") return cmd_prob(c, err);
    return cmd_star(c, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace mqg::cli
