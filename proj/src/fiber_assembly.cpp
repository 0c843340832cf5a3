#include "mqg/fiber_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "mqg/errors.hpp"

namespace mqg {

namespace {

constexpr double pi = std::numbers::pi;
constexpr cdouble I{0.0, 1.0};

double wrap_phase(double a) {
  double w = std::remainder(a, 2.0 * pi);
  return w <= -pi ? w + 2.0 * pi : w;
}

int half_edge_index(int vertex, Direction d) { return 4 * (vertex - 1) + static_cast<int>(d); }

// Partial-pivoting LU on a row-major buffer, in place, with implicit row
// permutation. Rows are tracked by their first and last nonzero column: a row
// can only hold a nonzero in column k once its first nonzero is <= k, and
// elimination never moves that boundary left. Only exact zeros are skipped,
// so the pivots are those of a plain dense LU.
//
// With `profile_known` the caller has already set s.first / s.last to bounds
// of the nonzeros of every row; entries outside them must be zero.
LogDet factor_in_place(std::span<cdouble> a, int n, std::vector<double>* pivots, LuScratch& s,
                       bool profile_known) {
  auto row = [&](int i) { return a.data() + static_cast<std::ptrdiff_t>(i) * n; };
  if (!profile_known) {
    s.first.assign(n, n);
    s.last.assign(n, -1);
    for (int i = 0; i < n; ++i) {
      const cdouble* r = row(i);
      for (int j = 0; j < n; ++j) {
        if (r[j] != 0.0) {
          s.first[i] = std::min(s.first[i], j);
          s.last[i] = j;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    const cdouble* r = row(i);
    for (int j = s.first[i]; j <= s.last[i]; ++j) {
      if (!std::isfinite(r[j].real()) || !std::isfinite(r[j].imag())) {
        throw ValidationError("log_det: matrix has non-finite entries");
      }
    }
  }
  if (pivots) pivots->assign(n, 0.0);
  s.by_first.resize(n);
  for (int i = 0; i < n; ++i) s.by_first[i] = i;
  std::stable_sort(s.by_first.begin(), s.by_first.end(),
                   [&](int x, int y) { return s.first[x] < s.first[y]; });
  s.active.clear();
  s.order.assign(n, -1);

  double log_mag = 0.0;
  double phase = 0.0;
  bool singular = false;
  std::size_t next = 0;
  for (int k = 0; k < n; ++k) {
    while (next < s.by_first.size() && s.first[s.by_first[next]] <= k) s.active.push_back(s.by_first[next++]);

    std::size_t best_pos = s.active.size();
    double best = 0.0;
    for (std::size_t t = 0; t < s.active.size(); ++t) {
      const double v = std::norm(row(s.active[t])[k]);
      if (v > best) {
        best = v;
        best_pos = t;
      }
    }
    if (best == 0.0) {
      singular = true;
      continue;
    }
    const int p = s.active[best_pos];
    s.active.erase(s.active.begin() + static_cast<std::ptrdiff_t>(best_pos));
    s.order[k] = p;

    const cdouble* pk = row(p);
    const cdouble piv = pk[k];
    const double mag = std::abs(piv);
    if (pivots) (*pivots)[k] = mag;
    log_mag += std::log(mag);
    phase += std::arg(piv);

    s.cols.clear();
    for (int j = k + 1; j <= s.last[p]; ++j) {
      if (pk[j] != 0.0) s.cols.push_back(j);
    }
    for (int i : s.active) {
      cdouble* ri = row(i);
      if (ri[k] == 0.0) continue;
      const cdouble l = ri[k] / piv;
      ri[k] = 0.0;
      for (int j : s.cols) ri[j] -= l * pk[j];
      s.last[i] = std::max(s.last[i], s.last[p]);
    }
  }
  if (singular) return {-std::numeric_limits<double>::infinity(), 0.0};

  // sign of the row permutation k -> order[k]
  std::vector<char>& seen = s.seen;
  seen.assign(n, 0);
  int transpositions = 0;
  for (int k = 0; k < n; ++k) {
    if (seen[k]) continue;
    int len = 0;
    for (int j = k; !seen[j]; j = s.order[j]) {
      seen[j] = 1;
      ++len;
    }
    transpositions += len - 1;
  }
  if (transpositions % 2 != 0) phase += pi;
  return {log_mag, wrap_phase(phase)};
}

}  // namespace

const char* to_string(Regime r) { return r == Regime::positive ? "positive" : "negative"; }

Regime parse_regime(const std::string& s) {
  if (s == "positive") return Regime::positive;
  if (s == "negative") return Regime::negative;
  throw ValidationError("unknown regime '" + s + "'");
}

SpectralParameter::SpectralParameter(Regime regime, double value) : regime_(regime), value_(value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError("spectral parameter must be positive and finite");
  }
}

cdouble SpectralParameter::momentum() const {
  return regime_ == Regime::positive ? cdouble{value_, 0.0} : cdouble{0.0, value_};
}

double SpectralParameter::energy() const {
  return regime_ == Regime::positive ? value_ * value_ : -value_ * value_;
}

CellLayout build_layout(const FluxRatio& flux) {
  const int q = flux.q();
  CellLayout layout{flux, {}, {}};
  layout.half_edges.reserve(4 * q);
  for (int v = 1; v <= q; ++v) {
    for (Direction d : {Direction::east, Direction::north, Direction::west, Direction::south}) {
      layout.half_edges.push_back({half_edge_index(v, d), v, d});
    }
  }
  layout.links.reserve(2 * q);
  for (int v = 1; v <= q; ++v) {
    const int east = half_edge_index(v, Direction::east);
    if (v < q) {
      layout.links.push_back({LinkKind::smooth_horizontal, east, half_edge_index(v + 1, Direction::west)});
    } else {
      layout.links.push_back({LinkKind::floquet_horizontal, east, half_edge_index(1, Direction::west)});
    }
    layout.links.push_back({LinkKind::floquet_vertical, half_edge_index(v, Direction::north),
                            half_edge_index(v, Direction::south)});
  }
  return layout;
}

FiberMatrix assemble(const SpectralParameter& z, const Quasimomentum& qm, const FluxRatio& flux) {
  return assemble(z, qm, build_layout(flux));
}

FiberMatrix assemble(const SpectralParameter& z, const Quasimomentum& qm, const CellLayout& layout) {
  FiberEvaluator ev(layout);
  return ev.matrix(z, qm);
}

bool LogDet::singular() const { return std::isinf(log_magnitude) && log_magnitude < 0.0; }

cdouble LogDet::value() const {
  if (singular()) return {0.0, 0.0};
  return std::polar(std::exp(log_magnitude), phase);
}

double LuSummary::smallest_pivot_ratio() const {
  if (pivot_magnitudes.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(pivot_magnitudes.begin(), pivot_magnitudes.end());
  return *hi > 0.0 ? *lo / *hi : 0.0;
}

int LuSummary::rank_deficiency(double relative) const {
  if (pivot_magnitudes.empty()) return 0;
  const double top = *std::max_element(pivot_magnitudes.begin(), pivot_magnitudes.end());
  return static_cast<int>(std::count_if(pivot_magnitudes.begin(), pivot_magnitudes.end(),
                                        [&](double m) { return m <= relative * top; }));
}

LuSummary lu_summary(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw ValidationError("log_det: matrix must be square");
  const int n = static_cast<int>(m.rows());
  std::vector<cdouble> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = m(i, j);
  }
  LuScratch scratch;
  LuSummary out;
  out.det = factor_in_place(a, n, &out.pivot_magnitudes, scratch, false);
  return out;
}

LogDet log_det(const Eigen::MatrixXcd& m) { return lu_summary(m).det; }

FiberEvaluator::FiberEvaluator(CellLayout layout)
    : layout_(std::move(layout)), n_(layout_.unknown_count()) {
  const Eigen::MatrixXcd u = coupling_matrix(4).entries;
  u_minus_ = u - Eigen::Matrix4cd::Identity();
  u_plus_ = u + Eigen::Matrix4cd::Identity();
  work_.resize(static_cast<std::size_t>(n_) * n_);
  row_kinds_.reserve(n_);
  for (int v = 1; v <= layout_.vertex_count(); ++v) {
    for (int j = 0; j < 4; ++j) row_kinds_.push_back(RowKind::vertex_coupling);
    for (int j = 0; j < 2; ++j) row_kinds_.push_back(RowKind::horizontal_link);
    for (int j = 0; j < 2; ++j) row_kinds_.push_back(RowKind::vertical_link);
  }
}

void FiberEvaluator::fill(const SpectralParameter& z, cdouble floquet1, cdouble floquet2) {
  scratch_.first.assign(n_, n_);
  scratch_.last.assign(n_, -1);
  const cdouble k = z.momentum();
  const cdouble ik = I * k;
  const cdouble ep = std::exp(0.5 * ik);   // exp(+ik/2)
  const cdouble em = std::exp(-0.5 * ik);  // exp(-ik/2)
  const auto& flux = layout_.flux;

  auto at = [&](int r, int c) -> cdouble& {
    scratch_.first[r] = std::min(scratch_.first[r], c);
    scratch_.last[r] = std::max(scratch_.last[r], c);
    return work_[static_cast<std::size_t>(r) * n_ + c];
  };

  // Gauge factor exp(i v B t) at the far end t = +-1/2 of a half-edge.
  auto gauge = [&](const HalfEdge& e, int end_sign) {
    if (!e.vertical()) return cdouble{1.0, 0.0};
    return std::polar(1.0, end_sign * flux.half_edge_gauge_phase(e.vertex));
  };

  int row = 0;
  for (int v = 1; v <= layout_.vertex_count(); ++v) {
    const int base = 4 * (v - 1);
    // (U - I) Psi + i (U + I) (D Psi)_out = 0
    for (int j = 0; j < 4; ++j, ++row) {
      for (int m = 0; m < 4; ++m) {
        const HalfEdge& e = layout_.half_edges[base + m];
        const cdouble a = u_minus_(j, m);
        const cdouble b = I * u_plus_(j, m);
        const cdouble out_d = static_cast<double>(e.orientation()) * ik;
        at(row, 2 * e.index) += a + b * out_d;
        at(row, 2 * e.index + 1) += a - b * out_d;
      }
    }
    for (int li = 2 * (v - 1); li < 2 * v; ++li) {
      const Link& link = layout_.links[li];
      const HalfEdge& up = layout_.half_edges[link.upper];
      const HalfEdge& lo = layout_.half_edges[link.lower];
      const cdouble phase = link.kind == LinkKind::smooth_horizontal   ? cdouble{1.0, 0.0}
                            : link.kind == LinkKind::floquet_horizontal ? floquet1
                                                                        : floquet2;
      const cdouble gu = gauge(up, +1);
      const cdouble gl = phase * gauge(lo, -1);
      // value at +1/2 of upper == phase * value at -1/2 of lower
      at(row, 2 * up.index) += gu * ep;
      at(row, 2 * up.index + 1) += gu * em;
      at(row, 2 * lo.index) -= gl * em;
      at(row, 2 * lo.index + 1) -= gl * ep;
      ++row;
      // same for the quasi-derivative d/dt - i*A
      at(row, 2 * up.index) += gu * ik * ep;
      at(row, 2 * up.index + 1) -= gu * ik * em;
      at(row, 2 * lo.index) -= gl * ik * em;
      at(row, 2 * lo.index + 1) += gl * ik * ep;
      ++row;
    }
  }
}

void FiberEvaluator::clear() {
  for (int i = 0; i < n_; ++i) {
    if (scratch_.last[i] < scratch_.first[i]) continue;
    cdouble* r = work_.data() + static_cast<std::ptrdiff_t>(i) * n_;
    std::fill(r + scratch_.first[i], r + scratch_.last[i] + 1, cdouble{});
  }
}

LogDet FiberEvaluator::log_det(const SpectralParameter& z, const Quasimomentum& qm) {
  return log_det(z, std::polar(1.0, qm.theta1()), std::polar(1.0, qm.theta2()));
}

LogDet FiberEvaluator::log_det(const SpectralParameter& z, cdouble floquet1, cdouble floquet2) {
  fill(z, floquet1, floquet2);
  const LogDet d = factor_in_place(work_, n_, nullptr, scratch_, true);
  clear();
  return d;
}

LuSummary FiberEvaluator::lu_summary(const SpectralParameter& z, const Quasimomentum& qm) {
  fill(z, std::polar(1.0, qm.theta1()), std::polar(1.0, qm.theta2()));
  LuSummary out;
  out.det = factor_in_place(work_, n_, &out.pivot_magnitudes, scratch_, true);
  clear();
  return out;
}

FiberMatrix FiberEvaluator::matrix(const SpectralParameter& z, const Quasimomentum& qm) {
  fill(z, std::polar(1.0, qm.theta1()), std::polar(1.0, qm.theta2()));
  FiberMatrix fm;
  fm.entries.resize(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) fm.entries(i, j) = work_[static_cast<std::size_t>(i) * n_ + j];
  }
  clear();
  fm.row_kinds = row_kinds_;
  return fm;
}

}  // namespace mqg
