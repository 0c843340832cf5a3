#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>
#include <optional>

#include "mqg/band_engine.hpp"
#include "mqg/cli.hpp"
#include "mqg/errors.hpp"
#include "mqg/spectral_analysis.hpp"

namespace py = pybind11;

namespace {

mqg::FluxRatio flux_of(int p, int q) {
  return p == 0 && q == 1 ? mqg::FluxRatio::baseline() : mqg::make_flux(p, q);
}

mqg::BandOptions options_of(double grid, double tol) {
  mqg::BandOptions o;
  o.grid_density = grid;
  o.edge_tol = tol;
  return o;
}

py::list band_list(const mqg::BandSet& set) {
  py::list out;
  for (const mqg::Band& b : set.bands) {
    py::dict d;
    d["z_lo"] = b.z_lo;
    d["z_hi"] = b.z_hi;
    d["e_lo"] = b.e_lo;
    d["e_hi"] = b.e_hi;
    d["touching"] = b.touching;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Band spectra of the magnetic square-lattice quantum graph";

  auto base = py::register_exception<mqg::Error>(m, "Error");
  py::register_exception<mqg::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<mqg::SingularRingError>(m, "SingularRingError", base.ptr());
  py::register_exception<mqg::NonCollapseError>(m, "NonCollapseError", base.ptr());
  py::register_exception<mqg::NoNarrowBandsError>(m, "NoNarrowBandsError", base.ptr());
  py::register_exception<mqg::IoError>(m, "IoError", base.ptr());

  const mqg::BandOptions defaults;

  m.def("coprime_ratios", [](int qmax) {
    std::vector<std::pair<int, int>> out;
    for (const auto& f : mqg::coprime_ratios(qmax)) out.emplace_back(f.p(), f.q());
    return out;
  }, py::arg("qmax"));

  m.def("validate_flux", [](int p, int q) {
    const auto f = mqg::make_flux(p, q);
    return std::make_pair(f.p(), f.q());
  }, py::arg("p"), py::arg("q"), "Returns (p, q) or raises ValidationError.");

  m.def("band_function", [](double z, int p, int q, bool negative) {
    const auto regime = negative ? mqg::Regime::negative : mqg::Regime::positive;
    return mqg::band_function(mqg::SpectralParameter(regime, z), flux_of(p, q)).theta_star;
  }, py::arg("z"), py::arg("p"), py::arg("q"), py::arg("negative") = false);

  m.def("scan_bands", [](int p, int q, double limit, bool negative, double grid, double tol) {
    const auto regime = negative ? mqg::Regime::negative : mqg::Regime::positive;
    std::optional<mqg::BandSet> set;
    {
      py::gil_scoped_release release;
      set = mqg::scan_bands(flux_of(p, q), regime, limit, options_of(grid, tol));
    }
    return band_list(*set);
  }, py::arg("p"), py::arg("q"), py::arg("limit"), py::arg("negative") = false,
     py::arg("grid") = defaults.grid_density, py::arg("tol") = defaults.edge_tol);

  m.def("probability_sigma", [](int p, int q, int n, double grid) {
    py::gil_scoped_release release;
    const auto r = mqg::probability_sigma(mqg::make_flux(p, q), n, options_of(grid, mqg::BandOptions{}.edge_tol));
    py::gil_scoped_acquire acquire;
    py::dict d;
    d["p_sigma"] = r.p_sigma;
    d["window_fraction"] = r.window_fraction;
    d["window_fraction_double"] = r.window_fraction_double;
    d["thouless_ref"] = r.thouless_ref;
    d["band_count_in_window"] = r.band_count_in_window;
    d["n"] = r.n;
    return d;
  }, py::arg("p"), py::arg("q"), py::arg("n") = 50, py::arg("grid") = defaults.grid_density);

  m.def("narrow_band_widths", [](int p, int q, int n) {
    const auto r = mqg::narrow_band_stats(mqg::make_flux(p, q), n);
    return std::make_pair(r.widths, r.gaps);
  }, py::arg("p"), py::arg("q"), py::arg("n") = 30);

  m.def("thouless_reference", &mqg::thouless_reference, py::arg("q"));
  m.def("star_graph_negative_eigenvalues", &mqg::star_graph_negative_eigenvalues, py::arg("n_edges"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    py::gil_scoped_release release;
    return mqg::cli::run(args, std::cout, std::cerr);
  }, py::arg("args"), "Runs the command-line tool in process and returns its exit code.");
}
