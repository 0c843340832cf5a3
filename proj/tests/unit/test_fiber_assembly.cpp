#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "closed_forms.hpp"
#include "mqg/errors.hpp"
#include "mqg/fiber_assembly.hpp"

using namespace mqg;

namespace {
constexpr double pi = std::numbers::pi;

double det_distance(const LogDet& a, const LogDet& b) {
  return std::abs(a.value() - b.value()) / std::max(std::abs(a.value()), std::abs(b.value()));
}
}  // namespace

TEST_CASE("spectral parameter") {
  const auto k = SpectralParameter::positive(2.0);
  CHECK(k.energy() == 4.0);
  CHECK(k.momentum() == cdouble(2.0, 0.0));
  const auto kappa = SpectralParameter::negative(3.0);
  CHECK(kappa.energy() == -9.0);
  CHECK(kappa.momentum() == cdouble(0.0, 3.0));
  CHECK_THROWS_AS(SpectralParameter::positive(0.0), ValidationError);
  CHECK_THROWS_AS(SpectralParameter::negative(-1.0), ValidationError);
  CHECK(parse_regime("negative") == Regime::negative);
  CHECK_THROWS_AS(parse_regime("sideways"), ValidationError);
}

TEST_CASE("cell layout") {
  for (int q : {2, 3, 7}) {
    const CellLayout layout = build_layout(FluxRatio::make(1, q));
    CHECK(layout.vertex_count() == q);
    CHECK(layout.half_edges.size() == static_cast<std::size_t>(4 * q));
    CHECK(layout.unknown_count() == 8 * q);
    CHECK(layout.links.size() == static_cast<std::size_t>(2 * q));
    int floquet_h = 0;
    for (const Link& l : layout.links) floquet_h += l.kind == LinkKind::floquet_horizontal;
    CHECK(floquet_h == 1);
  }
  const CellLayout base = build_layout(FluxRatio::baseline());
  CHECK(base.unknown_count() == 8);
}

TEST_CASE("fiber matrix shape and row kinds") {
  const auto m = assemble(SpectralParameter::positive(2.3), Quasimomentum(0.4, -0.7), FluxRatio::make(2, 5));
  CHECK(m.dimension() == 40);
  CHECK(m.entries.cols() == 40);
  CHECK(std::count(m.row_kinds.begin(), m.row_kinds.end(), RowKind::vertex_coupling) == 20);
  CHECK(std::count(m.row_kinds.begin(), m.row_kinds.end(), RowKind::horizontal_link) == 10);
  CHECK(std::count(m.row_kinds.begin(), m.row_kinds.end(), RowKind::vertical_link) == 10);
}

TEST_CASE("log_det on small matrices") {
  const LogDet id = log_det(Eigen::MatrixXcd::Identity(3, 3));
  CHECK(id.log_magnitude == doctest::Approx(0.0));
  CHECK(id.phase == doctest::Approx(0.0));

  Eigen::MatrixXcd one(1, 1);
  one(0, 0) = cdouble(0.0, 2.0);
  const LogDet d = log_det(one);
  CHECK(d.log_magnitude == doctest::Approx(std::log(2.0)));
  CHECK(d.phase == doctest::Approx(pi / 2));

  Eigen::MatrixXcd swap = Eigen::MatrixXcd::Zero(2, 2);
  swap(0, 1) = 1.0;
  swap(1, 0) = 1.0;
  const LogDet s = log_det(swap);
  CHECK(s.log_magnitude == doctest::Approx(0.0));
  CHECK(std::abs(s.phase) == doctest::Approx(pi));

  const LogDet z = log_det(Eigen::MatrixXcd::Zero(2, 2));
  CHECK(z.singular());
  CHECK(lu_summary(Eigen::MatrixXcd::Zero(2, 2)).rank_deficiency() == 2);

  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2);
  bad(1, 1) = cdouble(std::nan(""), 0.0);
  CHECK_THROWS_AS(log_det(bad), ValidationError);
}

TEST_CASE("log_det agrees with a dense determinant") {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXcd m(9, 9);
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) m(i, j) = (i + j) % 3 == 0 ? cdouble(0.0) : cdouble(g(rng), g(rng));
    const cdouble ref = m.determinant();
    const cdouble got = log_det(m).value();
    CHECK(std::abs(got - ref) < 1e-12 * std::abs(ref));
  }
}

TEST_CASE("evaluator matches assembled matrix") {
  const FluxRatio f = FluxRatio::make(3, 7);
  FiberEvaluator ev(build_layout(f));
  const SpectralParameter z = SpectralParameter::positive(5.1);
  const Quasimomentum qm(0.3, -1.2);
  const Eigen::MatrixXcd m = assemble(z, qm, f).entries;
  CHECK((ev.matrix(z, qm).entries - m).norm() == 0.0);
  CHECK(det_distance(ev.log_det(z, qm), log_det(m)) < 1e-12);
  // Repeated use of the scratch buffers gives the same result.
  CHECK(det_distance(ev.log_det(z, qm), ev.log_det(z, qm)) == 0.0);
  const auto neg = SpectralParameter::negative(1.7);
  CHECK(det_distance(ev.log_det(neg, qm), log_det(assemble(neg, qm, f).entries)) < 1e-12);
}

TEST_CASE("determinant is periodic in the quasimomentum") {
  const FluxRatio f = FluxRatio::make(2, 5);
  FiberEvaluator ev(build_layout(f));
  const SpectralParameter z = SpectralParameter::positive(3.3);
  const Quasimomentum a(-pi, 1.1);
  const Quasimomentum b = Quasimomentum::wrapped(pi, 1.1 + 2 * pi);
  CHECK(det_distance(ev.log_det(z, a), ev.log_det(z, b)) < 1e-12);
}

TEST_CASE("determinant is affine in Theta_q") {
  // det = phase * (h + s * Theta_q): the Theta_q = 0 point on the zero-phase
  // line is the mean of the two extremal points.
  for (int q : {2, 3, 6}) {
    for (int p = 1; p < q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      FiberEvaluator ev(build_layout(FluxRatio::make(p, q)));
      for (double k : {0.7, 2.3, 8.9}) {
        const SpectralParameter z = SpectralParameter::positive(k);
        const cdouble dp = ev.log_det(z, Quasimomentum::theta_plus_two()).value();
        const cdouble dm = ev.log_det(z, Quasimomentum::theta_minus_two(q)).value();
        const cdouble d0 = ev.log_det(z, Quasimomentum::theta_zero(q)).value();
        const double scale = std::max({std::abs(dp), std::abs(dm), std::abs(d0)});
        CHECK(std::abs(d0 - 0.5 * (dp + dm)) < 1e-9 * scale);
      }
    }
  }
}

TEST_CASE("determinant vanishes on a quasimomentum inside the band") {
  // q = 2: pick k with |theta*| < 2 from the closed form, split theta* evenly
  // between the two cosines and check the matrix is numerically singular.
  const FluxRatio f = FluxRatio::make(1, 2);
  FiberEvaluator ev(build_layout(f));
  int hits = 0;
  for (double k = 0.05; k < 6.0 && hits < 5; k += 0.0137) {
    const double t = oracle::theta_star_q2(k);
    if (std::abs(t) >= 1.9) continue;
    const double c = std::acos(t / 2);
    const Quasimomentum qm(c, c / 2);
    CHECK(ev.lu_summary(SpectralParameter::positive(k), qm).smallest_pivot_ratio() < 1e-10);
    ++hits;
  }
  CHECK(hits == 5);
}
