#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgraph/discretization.hpp"
#include "qgraph/functionals.hpp"
#include "qgraph/p1.hpp"
#include "qgraph/reference.hpp"
#include "qgraph/summation.hpp"
#include "qgraph/topology.hpp"

namespace qgraph {

/// A piece on which a function is linear: value a to value b over length len.
struct LinearPiece {
  double a = 0.0;
  double b = 0.0;
  double len = 0.0;
};

/// Every mesh cell of u as a piece, with nodal absolute values.
inline std::vector<LinearPiece> cell_pieces(const GraphFunction& u) {
  const auto& d = u.disc();
  std::vector<LinearPiece> out;
  out.reserve(d.cell_count());
  for (std::size_t e = 0; e < d.edge_count(); ++e) {
    const auto& eg = d.edge_grid(e);
    for (std::size_t k = 0; k < eg.cells; ++k) out.push_back({std::abs(u.node(e, k)), std::abs(u.node(e, k + 1)), eg.h});
  }
  return out;
}

/// Piecewise-linear function on increasing nodes x.
struct PiecewiseLinear {
  std::vector<double> x;
  std::vector<double> y;
  /// Optional exact segment lengths; x differences lose them to rounding
  /// once x is large and a segment is tiny.
  std::vector<double> seg;

  double dx(std::size_t k) const { return seg.empty() ? x[k + 1] - x[k] : seg[k]; }
  double lp_norm_p(int p) const {
    return pairwise_sum(0, x.size() < 2 ? 0 : x.size() - 1,
                        [&](std::size_t k) { return p1::int_abs_pow(y[k], y[k + 1], p, dx(k)); });
  }
  double kinetic() const {
    return pairwise_sum(0, x.size() < 2 ? 0 : x.size() - 1, [&](std::size_t k) {
      const double dx = this->dx(k), dy = y[k + 1] - y[k];
      if (dx > 0.0) return dy * dy / dx;
      return dy == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    });
  }
  /// Integral of y^2 over [x_lo, x_hi], exact for the linear model.
  double int_sq(double x_lo, double x_hi) const {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
      const double l = std::max(x[k], x_lo), r = std::min(x[k + 1], x_hi);
      if (r <= l) continue;
      s += p1::int_sq(value_at(l), value_at(r), r - l);
    }
    return s;
  }
  double value_at(double t) const {
    if (x.empty()) return 0.0;
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - x.begin()) - 1;
    const double dx = x[k + 1] - x[k];
    if (dx <= 0.0) return y[k + 1];
    const double s = (t - x[k]) / dx;
    return (1.0 - s) * y[k] + s * y[k + 1];
  }
  double length() const { return x.empty() ? 0.0 : x.back() - x.front(); }
};

/// Decreasing rearrangement of a family of nonnegative linear pieces onto
/// [0, total length). The distribution function of a piecewise-linear
/// function is piecewise linear in the level, so its inverse is again
/// piecewise linear with a node at every distinct input value: the result is
/// exactly equimeasurable with the input.
inline PiecewiseLinear rearrange_pieces(const std::vector<LinearPiece>& pieces) {
  struct P {
    double lo, hi, len;
  };
  std::vector<P> ps;
  std::vector<double> levels;
  for (const auto& q : pieces) {
    if (!(q.len > 0.0)) continue;
    if (q.a < 0.0 || q.b < 0.0) throw std::invalid_argument("rearrangement needs nonnegative values");
    ps.push_back({std::min(q.a, q.b), std::max(q.a, q.b), q.len});
    levels.push_back(q.a);
    levels.push_back(q.b);
  }
  PiecewiseLinear out;
  if (ps.empty()) return out;
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::vector<std::size_t> by_lo(ps.size()), by_hi(ps.size());
  std::iota(by_lo.begin(), by_lo.end(), 0);
  std::iota(by_hi.begin(), by_hi.end(), 0);
  std::sort(by_lo.begin(), by_lo.end(), [&](std::size_t i, std::size_t j) { return ps[i].lo > ps[j].lo; });
  std::sort(by_hi.begin(), by_hi.end(), [&](std::size_t i, std::size_t j) { return ps[i].hi > ps[j].hi; });

  double full = 0.0;  // pieces entirely above the current level
  std::size_t next_lo = 0, next_hi = 0;
  std::vector<std::size_t> active;  // pieces straddling the level, lo < t < hi
  double prev_x = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double t = levels[k];
    double jump = 0.0;
    double rate = 0.0;  // d(measure)/d(level) on (t, previous level)
    bool spanned = false;
    while (next_lo < by_lo.size() && ps[by_lo[next_lo]].lo >= t) {
      const P& q = ps[by_lo[next_lo]];
      if (q.hi == q.lo && q.lo == t) {
        jump += q.len;
      } else {
        full += q.len;
        if (q.lo == t) {
          spanned = true;
          rate += q.len / (q.hi - q.lo);
        }
      }
      ++next_lo;
    }
    while (next_hi < by_hi.size() && ps[by_hi[next_hi]].hi > t) {
      if (ps[by_hi[next_hi]].lo < t) active.push_back(by_hi[next_hi]);
      ++next_hi;
    }
    std::erase_if(active, [&](std::size_t i) { return ps[i].lo >= t; });
    double part = 0.0;
    for (std::size_t i : active) {
      part += ps[i].len * (ps[i].hi - t) / (ps[i].hi - ps[i].lo);
      rate += ps[i].len / (ps[i].hi - ps[i].lo);
    }
    double x = full + part;
    if (k > 0) {
      if (!spanned && active.empty()) throw std::invalid_argument("rearrangement: range has a gap (disconnected support)");
      out.seg.push_back((levels[k - 1] - t) * rate);
    }
    x = std::max(x, prev_x);
    out.x.push_back(x);
    out.y.push_back(t);
    if (jump > 0.0) {
      x += jump;
      full += jump;
      out.x.push_back(x);
      out.y.push_back(t);
      out.seg.push_back(jump);
    }
    prev_x = x;
  }
  return out;
}

struct RearrangedFunction {
  enum class Domain { HalfLine, Line };
  Domain domain = Domain::HalfLine;
  PiecewiseLinear profile;  ///< nodes on [0, X) or symmetric on (-X/2, X/2)
  /// Cell model: one constant (midpoint value) per source cell, sorted
  /// descending by (value, length).
  std::vector<double> cell_values;
  std::vector<double> cell_lengths;
  /// Largest relative L^2 / L^6 mismatch between profile and source.
  double reinterpolation_error = 0.0;

  double lp_norm_p(int p) const { return profile.lp_norm_p(p); }
  double kinetic() const { return profile.kinetic(); }
  double mass() const { return profile.lp_norm_p(2); }
  double cell_lp_norm_p(int p) const {
    return pairwise_sum(0, cell_values.size(), [&](std::size_t i) { return cell_lengths[i] * std::pow(cell_values[i], p); });
  }
};

/// L^p norm of the piecewise-constant cell model of u (same cell values as
/// the rearrangement uses).
inline double cell_model_lp(const GraphFunction& u, int p) {
  const auto pieces = cell_pieces(u);
  return pairwise_sum(0, pieces.size(), [&](std::size_t i) {
    return pieces[i].len * std::pow(0.5 * (pieces[i].a + pieces[i].b), p);
  });
}

namespace detail {

inline void fill_cell_model(RearrangedFunction& r, const std::vector<LinearPiece>& pieces) {
  std::vector<std::pair<double, double>> cells;
  cells.reserve(pieces.size());
  for (const auto& q : pieces) cells.push_back({0.5 * (q.a + q.b), q.len});
  std::sort(cells.begin(), cells.end(), std::greater<>());
  for (const auto& [v, l] : cells) {
    r.cell_values.push_back(v);
    r.cell_lengths.push_back(l);
  }
}

}  // namespace detail

/// u* on the half-line: nonincreasing, equimeasurable with |u|.
inline RearrangedFunction decreasing_rearrangement(const GraphFunction& u) {
  const auto pieces = cell_pieces(u);
  RearrangedFunction r;
  r.domain = RearrangedFunction::Domain::HalfLine;
  r.profile = rearrange_pieces(pieces);
  detail::fill_cell_model(r, pieces);
  for (int p : {2, 6}) {
    const double src = lp_norm_p(u, p);
    if (src > 0.0) r.reinterpolation_error = std::max(r.reinterpolation_error, std::abs(r.lp_norm_p(p) - src) / src);
  }
  return r;
}

/// Even rearrangement on the line: u#(x) = u*(2|x|).
inline RearrangedFunction symmetric_rearrangement(const GraphFunction& u) {
  auto half = decreasing_rearrangement(u);
  RearrangedFunction r;
  r.domain = RearrangedFunction::Domain::Line;
  const auto& p = half.profile;
  const std::size_t n = p.x.size();
  for (std::size_t k = n; k-- > 1;) {
    r.profile.x.push_back(-0.5 * p.x[k]);
    r.profile.y.push_back(p.y[k]);
    r.profile.seg.push_back(0.5 * p.dx(k - 1));
  }
  for (std::size_t k = 0; k < n; ++k) {
    r.profile.x.push_back(0.5 * p.x[k]);
    r.profile.y.push_back(p.y[k]);
    if (k + 1 < n) r.profile.seg.push_back(0.5 * p.dx(k));
  }
  r.cell_values = std::move(half.cell_values);
  r.cell_lengths = std::move(half.cell_lengths);
  r.reinterpolation_error = half.reinterpolation_error;
  return r;
}

struct BridgeDoubled {
  MetricGraph graph;
  GraphFunction u;
  std::vector<std::size_t> bridges;  ///< bridge edges of the source graph
};

/// Every bridge is stretched by 2 and duplicated (ids <id>.1 and <id>.2,
/// half-lines stay half-lines); the copies keep the source node count, so
/// node k of a copy carries node k of the source edge.
inline BridgeDoubled bridge_double(const GraphFunction& u) {
  const auto& d = u.disc();
  const auto& g = d.graph();
  BridgeDoubled out;
  out.bridges = bridge_set(g);
  std::vector<bool> is_bridge(g.edge_count(), false);
  for (std::size_t e : out.bridges) is_bridge[e] = true;

  std::vector<Edge> edges;
  std::vector<std::size_t> source, cells;
  std::vector<double> lengths;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    const auto& eg = d.edge_grid(e);
    if (!is_bridge[e]) {
      edges.push_back(ed);
      source.push_back(e);
      cells.push_back(eg.cells);
      lengths.push_back(eg.length);
      continue;
    }
    for (const char* suffix : {".1", ".2"}) {
      Edge copy = ed;
      copy.id = ed.id + suffix;
      if (!ed.is_half_line()) copy.length = 2.0 * ed.length;
      edges.push_back(copy);
      source.push_back(e);
      cells.push_back(eg.cells);
      lengths.push_back(2.0 * eg.length);
    }
  }
  out.graph = MetricGraph(g.name() + "_bridge_doubled", g.vertices(), edges);
  GridSpec spec = d.spec();
  auto disc = std::make_shared<const Discretization>(out.graph, spec, cells, lengths);
  std::vector<double> v(disc->dof_count(), 0.0);
  for (std::size_t i = 0; i < source.size(); ++i)
    for (std::size_t k = 0; k <= cells[i]; ++k)
      if (const std::size_t dof = disc->node_dof(i, k); dof != kNoDof) v[dof] = u.node(source[i], k);
  out.u = GraphFunction(disc, std::move(v));
  return out;
}

struct BridgeBound {
  double lhs = 0.0;  ///< int u^6 + 3 int_B u^6
  double rhs = 0.0;  ///< 3 ((mu + 3 mu_B) / mu_R)^2 int |u'|^2
  double mu = 0.0;
  double mu_bridges = 0.0;
};

inline BridgeBound bridge_doubling_bound_check(const GraphFunction& u) {
  BridgeBound b;
  b.mu = mass(u);
  double six_b = 0.0;
  for (std::size_t e : bridge_set(u.graph())) {
    b.mu_bridges += edge_mass(u, e);
    six_b += edge_lp(u, e, 6);
  }
  b.lhs = lp_norm_p(u, 6) + 3.0 * six_b;
  const double r = (b.mu + 3.0 * b.mu_bridges) / Constants::mu_R;
  b.rhs = 3.0 * r * r * kinetic(u);
  return b;
}

/// Result of replacing the tail of a nonincreasing profile psi on [0, ell]
/// beyond x0 by psi(x0) exp(-lambda (x - x0)).
struct TailRegularization {
  double ell = 0.0;
  double x0 = 0.0;
  std::size_t x0_index = 0;  ///< node of psi where the scan stopped
  double m = 0.0;            ///< int_{ell/2}^{ell} psi^2
  double theta = 0.0;        ///< (1/2) int_{x0}^{ell} psi^2
  double lambda = 0.0;       ///< psi(x0)^2 / (2 theta); 0 when theta = 0
  bool zero_extension = false;
  PiecewiseLinear head;  ///< psi on [0, x0] (all of [0, ell] under zero extension)
  double psi_x0 = 0.0;

  // i)
  double psi0 = 0.0;
  double v0 = 0.0;
  // ii)
  double mass_psi = 0.0;
  double mass_v = 0.0;
  double tail_mass = 0.0;  ///< psi(x0)^2 / (2 lambda)
  // iii)
  double kinetic_psi = 0.0;
  double kinetic_v = 0.0;
  double tail_kinetic = 0.0;  ///< lambda psi(x0)^2 / 2
  double C_iii = 0.0;         ///< smallest C with kinetic_v <= kinetic_psi + C theta^(1/2)
  double C_iii_bound = 0.0;   ///< 32 (2m)^(1/2) / ell^2
  // iv)
  double sextic_psi = 0.0;
  double sextic_v = 0.0;
  double tail_sextic = 0.0;  ///< psi(x0)^6 / (6 lambda)
  double C_iv = 0.0;          ///< smallest C with sextic_v >= sextic_psi - C theta
  double C_iv_bound = 0.0;    ///< 2 psi(ell/2)^4

  double v(double x) const {
    if (x <= x0 || zero_extension) return x <= head.x.back() ? head.value_at(x) : 0.0;
    return psi_x0 * std::exp(-lambda * (x - x0));
  }
};

class TailScanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline TailRegularization tail_regularize(const PiecewiseLinear& psi) {
  const auto& x = psi.x;
  const auto& y = psi.y;
  if (x.size() < 3 || x.size() != y.size() || x.front() != 0.0) throw std::invalid_argument("tail_regularize: need nodes on [0, ell] starting at 0");
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    if (x[k + 1] < x[k]) throw std::invalid_argument("tail_regularize: nodes must increase");
    if (y[k + 1] > y[k] + 1e-14 * std::max(1.0, y[0])) throw std::invalid_argument("tail_regularize: psi must be nonincreasing");
  }
  if (y.back() < 0.0) throw std::invalid_argument("tail_regularize: psi must be nonnegative");
  TailRegularization t;
  t.ell = x.back();
  const double ell = t.ell;
  t.m = psi.int_sq(0.5 * ell, ell);

  // Suffix integrals of psi^2 from every node to ell.
  const std::size_t n = x.size();
  std::vector<double> suffix(n, 0.0);
  for (std::size_t k = n - 1; k-- > 0;) suffix[k] = suffix[k + 1] + p1::int_sq(y[k], y[k + 1], psi.dx(k));

  std::optional<std::size_t> found;
  const double coef = 64.0 * std::sqrt(t.m) / (ell * ell);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (x[k] < 0.5 * ell * (1.0 - 1e-12) || x[k] >= ell) continue;
    const double p2 = y[k] * y[k];
    if (p2 * p2 <= coef * std::pow(suffix[k], 1.5)) {
      found = k;
      break;
    }
  }
  if (!found) throw TailScanError("tail_regularize: no grid point of [ell/2, ell) satisfies the x0 condition");
  const std::size_t k0 = *found;
  t.x0_index = k0;
  t.x0 = x[k0];
  t.psi_x0 = y[k0];
  t.theta = 0.5 * suffix[k0];
  t.psi0 = y[0];
  t.mass_psi = suffix[0];
  t.kinetic_psi = psi.kinetic();
  t.sextic_psi = psi.lp_norm_p(6);
  const double half_val = psi.value_at(0.5 * ell);
  t.C_iii_bound = 32.0 * std::sqrt(2.0 * t.m) / (ell * ell);
  t.C_iv_bound = 2.0 * std::pow(half_val, 4);

  if (t.theta == 0.0) {
    t.zero_extension = true;
    t.head = psi;
    t.v0 = y[0];
    t.mass_v = t.mass_psi;
    t.kinetic_v = t.kinetic_psi;
    t.sextic_v = t.sextic_psi;
    return t;
  }
  t.head.x.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k0) + 1);
  t.head.y.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(k0) + 1);
  if (!psi.seg.empty()) t.head.seg.assign(psi.seg.begin(), psi.seg.begin() + static_cast<std::ptrdiff_t>(k0));
  t.lambda = t.psi_x0 * t.psi_x0 / (2.0 * t.theta);
  const double p2 = t.psi_x0 * t.psi_x0;
  t.tail_mass = p2 / (2.0 * t.lambda);
  t.tail_kinetic = t.lambda * p2 / 2.0;
  t.tail_sextic = p2 * p2 * p2 / (6.0 * t.lambda);
  t.v0 = t.head.y.front();
  t.mass_v = t.head.lp_norm_p(2) + t.tail_mass;
  t.kinetic_v = t.head.kinetic() + t.tail_kinetic;
  t.sextic_v = t.head.lp_norm_p(6) + t.tail_sextic;
  t.C_iii = std::max(0.0, (t.kinetic_v - t.kinetic_psi) / std::sqrt(t.theta));
  t.C_iv = std::max(0.0, (t.sextic_psi - t.sextic_v) / t.theta);
  return t;
}

/// Uniform samples of psi on [0, ell].
inline TailRegularization tail_regularize(const std::vector<double>& samples, double ell) {
  if (samples.size() < 3 || !(ell > 0.0)) throw std::invalid_argument("tail_regularize: need >= 3 samples and ell > 0");
  PiecewiseLinear p;
  const double h = ell / static_cast<double>(samples.size() - 1);
  for (std::size_t k = 0; k < samples.size(); ++k) p.x.push_back(k + 1 == samples.size() ? ell : h * static_cast<double>(k));
  p.y = samples;
  return tail_regularize(p);
}

/// Raised when the maximum point admits no continuation path that avoids
/// graph surgery.
class UnsupportedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModifiedGNCheck {
  double mu = 0.0;
  double ell = 0.0;
  double theta = 0.0;
  double lhs = 0.0;          ///< |u|_6^6
  double rhs_kinetic = 0.0;  ///< 3 ((mu - theta) / mu_R)^2 |u'|_2^2
  double measured_C = 0.0;   ///< smallest C >= 0 with lhs <= rhs_kinetic + C theta^(1/2)
  double C_graph = 0.0;      ///< constant from the construction, depends on ell only
  // The line function w (psi on the left, v on the right).
  double w_mass = 0.0;
  double w_kinetic = 0.0;
  double w_sextic = 0.0;
  double psi_kinetic = 0.0;  ///< total kinetic of psi on (-inf, ell], at most |u'|_2^2
  TailRegularization tail;
  std::string gamma;  ///< where the continuation path runs
};

namespace detail {

/// A stretch [lo, hi] of edge `edge` in its own coordinate.
struct EdgeInterval {
  std::size_t edge;
  double lo, hi;
};

/// Point of the continuation search: a vertex, or a point inside an edge.
struct PathPoint {
  std::optional<std::size_t> vertex;
  std::size_t edge = 0;
  double x = 0.0;
};

struct Continuation {
  std::vector<EdgeInterval> pieces;
  std::vector<std::size_t> inner_vertices;  ///< vertices of gamma other than its start
  PathPoint end;
};

/// Simple paths of length ell from the start point, in a fixed order.
inline std::vector<Continuation> continuations(const Discretization& d, const PathPoint& start, double ell) {
  const auto& g = d.graph();
  std::vector<Continuation> out;
  std::function<void(std::size_t, double, Continuation&, std::vector<bool>&, std::vector<bool>&)> walk =
      [&](std::size_t v, double rem, Continuation& cur, std::vector<bool>& used, std::vector<bool>& seen) {
        for (std::size_t f = 0; f < g.edge_count(); ++f) {
          if (used[f]) continue;
          const Edge& ed = g.edge(f);
          const double len = d.edge_grid(f).length;
          for (int side = 0; side < 2; ++side) {
            const bool from_side = side == 0;
            if (from_side ? ed.from != v : (ed.is_half_line() || ed.to != v)) continue;
            if (ed.is_loop() && !from_side) continue;  // one orientation per loop direction below
            for (int dir = 0; dir < (ed.is_loop() ? 2 : 1); ++dir) {
              const bool forward = ed.is_loop() ? dir == 0 : from_side;
              if (rem < len) {
                Continuation c = cur;
                c.pieces.push_back(forward ? EdgeInterval{f, 0.0, rem} : EdgeInterval{f, len - rem, len});
                c.end = {std::nullopt, f, forward ? rem : len - rem};
                out.push_back(std::move(c));
                continue;
              }
              if (ed.is_loop() || ed.is_half_line()) continue;  // would close a loop or leave the mesh
              const std::size_t w = forward ? ed.to : ed.from;
              if (seen[w]) continue;
              Continuation c = cur;
              c.pieces.push_back({f, 0.0, len});
              used[f] = true;
              seen[w] = true;
              c.inner_vertices.push_back(w);
              if (rem == len) {
                c.end = {w, f, forward ? len : 0.0};
                out.push_back(c);
              } else {
                walk(w, rem - len, c, used, seen);
              }
              used[f] = false;
              seen[w] = false;
            }
          }
        }
      };
  std::vector<bool> used(g.edge_count(), false), seen(g.vertex_count(), false);
  Continuation cur;
  if (start.vertex) {
    seen[*start.vertex] = true;
    walk(*start.vertex, ell, cur, used, seen);
    return out;
  }
  const Edge& ed = g.edge(start.edge);
  const double len = d.edge_grid(start.edge).length;
  // Towards `to` (or along a half-line), then towards `from`.
  if (start.x + ell < len) {
    out.push_back({{{start.edge, start.x, start.x + ell}}, {}, {std::nullopt, start.edge, start.x + ell}});
  } else if (!ed.is_half_line()) {
    Continuation c{{{start.edge, start.x, len}}, {ed.to}, {}};
    used[start.edge] = true;
    seen[ed.to] = true;
    if (start.x + ell == len) {
      c.end = {ed.to, start.edge, len};
      out.push_back(c);
    } else {
      walk(ed.to, ell - (len - start.x), c, used, seen);
    }
    used[start.edge] = false;
    seen[ed.to] = false;
  }
  if (start.x - ell > 0.0) {
    out.push_back({{{start.edge, start.x - ell, start.x}}, {}, {std::nullopt, start.edge, start.x - ell}});
  } else {
    Continuation c{{{start.edge, 0.0, start.x}}, {ed.from}, {}};
    used[start.edge] = true;
    seen[ed.from] = true;
    if (start.x - ell == 0.0) {
      c.end = {ed.from, start.edge, 0.0};
      out.push_back(c);
    } else {
      walk(ed.from, ell - start.x, c, used, seen);
    }
    used[start.edge] = false;
    seen[ed.from] = false;
  }
  return out;
}

/// Splits every edge at the ends of gamma and at the start point; reports
/// whether the closure of G minus gamma is connected and whether the start
/// reaches infinity without touching any other point of gamma.
inline bool surgery_free(const Discretization& d, const PathPoint& start, const Continuation& c) {
  const auto& g = d.graph();
  const std::size_t nv = g.vertex_count();
  const std::size_t P = nv, Y = nv + 1, INF = nv + 2;
  std::vector<std::size_t> parent(nv + 3);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
  auto node_at = [&](std::size_t e, double x) -> std::size_t {
    const auto& eg = d.edge_grid(e);
    if (x == 0.0) return eg.from;
    if (x == eg.length) return eg.to == kNoDof ? INF : eg.to;
    if (!start.vertex && start.edge == e && start.x == x) return P;
    return Y;
  };
  std::vector<std::pair<std::size_t, std::size_t>> rest;  // segments off gamma
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const double len = d.edge_grid(e).length;
    std::vector<double> cuts{0.0, len};
    if (!start.vertex && start.edge == e) cuts.push_back(start.x);
    for (const auto& iv : c.pieces)
      if (iv.edge == e) {
        cuts.push_back(iv.lo);
        cuts.push_back(iv.hi);
      }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
      bool on_gamma = false;
      for (const auto& iv : c.pieces) on_gamma |= iv.edge == e && iv.lo <= mid && mid <= iv.hi;
      if (!on_gamma) rest.push_back({node_at(e, cuts[k]), node_at(e, cuts[k + 1])});
    }
  }
  if (rest.empty()) return false;
  for (const auto& [a, b] : rest) parent[find(a)] = find(b);
  const std::size_t root = find(rest.front().first);
  for (const auto& [a, b] : rest)
    if (find(a) != root) return false;

  const std::size_t s = start.vertex ? *start.vertex : P;
  std::vector<bool> blocked(nv + 3, false);
  for (std::size_t v : c.inner_vertices) blocked[v] = true;
  if (c.end.vertex)
    blocked[*c.end.vertex] = true;
  else
    blocked[Y] = true;
  blocked[s] = false;
  std::vector<bool> seen(nv + 3, false);
  std::vector<std::size_t> stack{s};
  seen[s] = true;
  while (!stack.empty()) {
    const std::size_t a = stack.back();
    stack.pop_back();
    if (a == INF) return true;
    for (const auto& [p, q] : rest)
      for (auto [from, to] : {std::pair{p, q}, std::pair{q, p}})
        if (from == a && !seen[to] && !blocked[to]) {
          seen[to] = true;
          stack.push_back(to);
        }
  }
  return false;
}

/// Linear pieces of u over [lo, hi] on edge e, split at mesh nodes.
inline void append_pieces(const GraphFunction& u, std::size_t e, double lo, double hi, std::vector<LinearPiece>& out) {
  const auto& eg = u.disc().edge_grid(e);
  if (!(hi > lo)) return;
  const auto k_lo = static_cast<std::size_t>(std::floor(lo / eg.h));
  for (std::size_t k = std::min(k_lo, eg.cells - 1); k < eg.cells; ++k) {
    const double a = std::max(lo, static_cast<double>(k) * eg.h);
    const double b = std::min(hi, k + 1 == eg.cells ? eg.length : static_cast<double>(k + 1) * eg.h);
    if (b > a) out.push_back({std::abs(u.value_at(e, a)), std::abs(u.value_at(e, b)), b - a});
    if (b >= hi) break;
  }
}

}  // namespace detail

/// Length scale of the construction: half the shortest loop, or 1 without loops.
inline double modified_gn_ell(const MetricGraph& g) {
  const auto loop = shortest_loop_length(g);
  return loop ? 0.5 * *loop : 1.0;
}

/// Modified Gagliardo-Nirenberg pipeline in the surgery-free case: psi is the
/// decreasing rearrangement of u on a continuation gamma of length ell from
/// the maximum point, glued to the rearrangement of u off gamma; the tail of
/// psi is regularized; w is assembled on the line.
inline ModifiedGNCheck modified_gn_check(const GraphFunction& u_in, double budget = 1e-3) {
  const auto& d = u_in.disc();
  const auto& g = d.graph();
  if (!terminal_points(g).empty()) throw std::invalid_argument("modified_gn_check: graph has a terminal point");
  const GraphFunction u = u_in.abs();
  ModifiedGNCheck r;
  r.mu = mass(u);
  if (!(r.mu > 0.0)) throw std::invalid_argument("modified_gn_check: zero function");
  if (r.mu > Constants::mu_R + budget) throw std::invalid_argument("modified_gn_check: mass exceeds mu_R");
  r.ell = modified_gn_ell(g);

  const auto vals = u.dofs();
  const auto imax = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  detail::PathPoint start;
  if (d.is_vertex_dof(imax)) {
    start.vertex = imax;
  } else {
    for (std::size_t e = 0; e < d.edge_count(); ++e) {
      const auto& eg = d.edge_grid(e);
      if (imax >= eg.offset && imax < eg.offset + eg.cells - 1) {
        start.edge = e;
        start.x = d.node_position(e, imax - eg.offset + 1);
      }
    }
  }
  const auto cands = detail::continuations(d, start, r.ell);
  const detail::Continuation* gamma = nullptr;
  for (const auto& c : cands)
    if (detail::surgery_free(d, start, c)) {
      gamma = &c;
      break;
    }
  if (!gamma) throw UnsupportedInput("modified_gn_check: the maximum point has no continuation of length ell that avoids surgery");

  std::vector<LinearPiece> on, off;
  for (std::size_t e = 0; e < d.edge_count(); ++e) {
    const double len = d.edge_grid(e).length;
    std::vector<std::pair<double, double>> mine;
    for (const auto& iv : gamma->pieces)
      if (iv.edge == e) mine.push_back({iv.lo, iv.hi});
    std::sort(mine.begin(), mine.end());
    double pos = 0.0;
    for (const auto& [lo, hi] : mine) {
      detail::append_pieces(u, e, pos, lo, off);
      detail::append_pieces(u, e, lo, hi, on);
      pos = hi;
    }
    detail::append_pieces(u, e, pos, len, off);
  }
  for (const auto& iv : gamma->pieces) {
    if (!r.gamma.empty()) r.gamma += ", ";
    r.gamma += g.edge(iv.edge).id + "[" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + "]";
  }

  PiecewiseLinear psi = rearrange_pieces(on);
  psi.x.back() = r.ell;  // absorb rounding in the accumulated length
  for (std::size_t k = psi.x.size() - 1; k-- > 0;) psi.x[k] = std::min(psi.x[k], psi.x[k + 1]);
  const PiecewiseLinear left = rearrange_pieces(off);
  r.tail = tail_regularize(psi);
  r.theta = r.tail.theta;
  r.psi_kinetic = left.kinetic() + r.tail.kinetic_psi;
  r.w_mass = left.lp_norm_p(2) + r.tail.mass_v;
  r.w_kinetic = left.kinetic() + r.tail.kinetic_v;
  r.w_sextic = left.lp_norm_p(6) + r.tail.sextic_v;

  r.lhs = lp_norm_p(u, 6);
  const double q = (r.mu - r.theta) / Constants::mu_R;
  r.rhs_kinetic = 3.0 * q * q * kinetic(u);
  const double excess = r.lhs - r.rhs_kinetic;
  if (excess <= 0.0)
    r.measured_C = 0.0;
  else
    r.measured_C = r.theta > 0.0 ? excess / std::sqrt(r.theta) : std::numeric_limits<double>::infinity();
  const double c3 = 32.0 * std::sqrt(2.0 * Constants::mu_R) / (r.ell * r.ell);
  const double c4 = 2.0 * std::pow(2.0 * Constants::mu_R / r.ell, 2);
  r.C_graph = 3.0 * c3 + c4 * std::sqrt(Constants::mu_R);
  return r;
}

inline ModifiedGNCheck modified_gn_check(const GraphFunction& u, double mu, double budget) {
  const double m = mass(u);
  if (std::abs(m - mu) > 1e-8 * std::max(1.0, mu)) throw std::invalid_argument("modified_gn_check: mass(u) differs from mu");
  return modified_gn_check(u, budget);
}

}  // namespace qgraph
