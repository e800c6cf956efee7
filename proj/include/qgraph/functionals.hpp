#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgraph/discretization.hpp"
#include "qgraph/p1.hpp"
#include "qgraph/summation.hpp"

namespace qgraph {

namespace detail {

/// Sum over the cells of one edge of f(a, b, h) for node values a, b.
template <class CellFn>
double edge_sum(const Discretization& d, std::span<const double> u, std::size_t e, const CellFn& f) {
  const auto& eg = d.edge_grid(e);
  auto val = [&](std::size_t k) {
    const std::size_t dof = d.node_dof(e, k);
    return dof == kNoDof ? 0.0 : u[dof];
  };
  return pairwise_sum(0, eg.cells, [&](std::size_t k) { return f(val(k), val(k + 1), eg.h); });
}

template <class CellFn>
double graph_sum(const Discretization& d, std::span<const double> u, const CellFn& f) {
  return pairwise_sum(0, d.edge_count(), [&](std::size_t e) { return edge_sum(d, u, e, f); });
}

inline double mass(const Discretization& d, std::span<const double> u) {
  return graph_sum(d, u, [](double a, double b, double h) { return p1::int_sq(a, b, h); });
}
inline double kinetic(const Discretization& d, std::span<const double> u) {
  return graph_sum(d, u, [](double a, double b, double h) { return p1::int_deriv_sq(a, b, h); });
}
inline double sextic(const Discretization& d, std::span<const double> u) {
  return graph_sum(d, u, [](double a, double b, double h) { return p1::int_sixth(a, b, h); });
}

/// Scatters per-cell contributions (da, db) into a weak (nodal) vector.
template <class CellGrad>
std::vector<double> assemble(const Discretization& d, std::span<const double> u, const CellGrad& grad) {
  std::vector<double> out(d.dof_count(), 0.0);
  for (std::size_t e = 0; e < d.edge_count(); ++e) {
    const auto& eg = d.edge_grid(e);
    std::size_t left = d.node_dof(e, 0);
    double a = u[left];
    for (std::size_t k = 0; k < eg.cells; ++k) {
      const std::size_t right = d.node_dof(e, k + 1);
      const double b = right == kNoDof ? 0.0 : u[right];
      const auto [ga, gb] = grad(a, b, eg.h);
      out[left] += ga;
      if (right != kNoDof) out[right] += gb;
      left = right;
      a = b;
    }
  }
  return out;
}

/// Weak derivatives  dK/du, dP/du, and C u  (C the consistent mass matrix,
/// so that mass = u.C u).
inline std::vector<double> kinetic_weak_gradient(const Discretization& d, std::span<const double> u) {
  return assemble(d, u, [](double a, double b, double h) {
    const double g = 2.0 * (a - b) / h;
    return std::pair{g, -g};
  });
}
inline std::vector<double> sextic_weak_gradient(const Discretization& d, std::span<const double> u) {
  return assemble(d, u, [](double a, double b, double h) {
    return std::pair{p1::d_int_sixth_da(a, b, h), p1::d_int_sixth_da(b, a, h)};
  });
}
inline std::vector<double> mass_apply(const Discretization& d, std::span<const double> u) {
  return assemble(d, u, [](double a, double b, double h) {
    return std::pair{h * (2.0 * a + b) / 6.0, h * (a + 2.0 * b) / 6.0};
  });
}

/// Weak gradient of E = K/2 - P/6 with respect to the nodal unknowns.
inline std::vector<double> energy_weak_gradient(const Discretization& d, std::span<const double> u) {
  return assemble(d, u, [](double a, double b, double h) {
    const double gk = (a - b) / h;
    return std::pair{gk - p1::d_int_sixth_da(a, b, h) / 6.0, -gk - p1::d_int_sixth_da(b, a, h) / 6.0};
  });
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  return pairwise_sum(0, x.size(), [&](std::size_t i) { return x[i] * y[i]; });
}

}  // namespace detail

/// Integral of u^2 (exact for the piecewise-linear model).
inline double mass(const GraphFunction& u) { return detail::mass(u.disc(), u.dofs()); }

/// Integral of |u|^p, exact per interval.
inline double lp_norm_p(const GraphFunction& u, int p) {
  if (p < 1) throw std::invalid_argument("lp_norm_p: p must be >= 1");
  return detail::graph_sum(u.disc(), u.dofs(), [p](double a, double b, double h) { return p1::int_abs_pow(a, b, p, h); });
}

/// Integral of |u'|^2 (without the factor 1/2).
inline double kinetic(const GraphFunction& u) { return detail::kinetic(u.disc(), u.dofs()); }

struct EnergyBreakdown {
  double kinetic = 0.0;    ///< (1/2) |u'|_2^2
  double potential = 0.0;  ///< (1/6) |u|_6^6
  double total = 0.0;      ///< kinetic - potential
  double mass = 0.0;
};

inline EnergyBreakdown energy(const GraphFunction& u) {
  EnergyBreakdown b;
  b.kinetic = 0.5 * kinetic(u);
  b.potential = detail::sextic(u.disc(), u.dofs()) / 6.0;
  b.total = b.kinetic - b.potential;
  b.mass = mass(u);
  return b;
}

inline double energy_total(const Discretization& d, std::span<const double> u) {
  return 0.5 * detail::kinetic(d, u) - detail::sextic(d, u) / 6.0;
}

/// |u|_6^6 / (|u|_2^4 |u'|_2^2).
inline double gn_quotient(const GraphFunction& u) {
  const double m = mass(u);
  const double k = kinetic(u);
  if (!(m > 0.0) || !(k > 0.0)) throw std::domain_error("gn_quotient: needs nonzero mass and kinetic term");
  return detail::sextic(u.disc(), u.dofs()) / (m * m * k);
}

/// L^2 representative of the energy gradient under the lumped mass matrix:
/// interior rows approximate -u'' - u^5, vertex rows carry the Kirchhoff
/// flux balance divided by the vertex mass.
inline GraphFunction energy_gradient(const GraphFunction& u) {
  auto g = detail::energy_weak_gradient(u.disc(), u.dofs());
  const auto& lm = u.disc().lumped_mass();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] /= lm[i];
  return GraphFunction(u.discretization(), std::move(g));
}

/// Lumped-mass inner product, the pairing under which energy_gradient is the
/// Riesz representative of dE.
inline double lumped_inner(const GraphFunction& f, const GraphFunction& g) {
  const auto& lm = f.disc().lumped_mass();
  const auto a = f.dofs();
  const auto b = g.dofs();
  return pairwise_sum(0, a.size(), [&](std::size_t i) { return lm[i] * a[i] * b[i]; });
}

/// Lagrange multiplier of u'' + u^5 = omega u, from testing the equation with u.
inline double omega_estimate(const GraphFunction& u) {
  const double m = mass(u);
  if (!(m > 0.0)) throw std::domain_error("omega_estimate: zero mass");
  return (detail::sextic(u.disc(), u.dofs()) - kinetic(u)) / m;
}

inline double h1_norm(const GraphFunction& u) { return std::sqrt(mass(u) + kinetic(u)); }

/// Discrete residual of -u'' - u^5 + omega u = 0 with Kirchhoff conditions:
/// interior rows in the lumped L^2 norm plus squared flux defects at the
/// vertices, normalised by |u|_{H^1}. Exactly zero at discrete constrained
/// critical points with the matching omega.
inline double stationary_residual(const Discretization& d, std::span<const double> u, double omega) {
  const double m = detail::mass(d, u);
  const double k = detail::kinetic(d, u);
  const double norm = std::sqrt(m + k);
  if (norm == 0.0) return 0.0;
  auto r = detail::energy_weak_gradient(d, u);
  const auto cu = detail::mass_apply(d, u);
  const auto& lm = d.lumped_mass();
  const std::size_t nv = d.graph().vertex_count();
  const double interior = pairwise_sum(nv, r.size() - nv, [&](std::size_t i) {
    const double ri = r[i] + omega * cu[i];
    return ri * ri / lm[i];
  });
  const double flux = pairwise_sum(0, nv, [&](std::size_t i) {
    const double ri = r[i] + omega * cu[i];
    return ri * ri;
  });
  return std::sqrt(interior + flux) / norm;
}

inline double stationary_residual(const GraphFunction& u, double omega) {
  return stationary_residual(u.disc(), u.dofs(), omega);
}

/// Mass restricted to one edge, and the L^p analogue.
inline double edge_mass(const GraphFunction& u, std::size_t e) {
  return detail::edge_sum(u.disc(), u.dofs(), e, [](double a, double b, double h) { return p1::int_sq(a, b, h); });
}
inline double edge_lp(const GraphFunction& u, std::size_t e, int p) {
  return detail::edge_sum(u.disc(), u.dofs(), e, [p](double a, double b, double h) { return p1::int_abs_pow(a, b, p, h); });
}
inline double edge_kinetic(const GraphFunction& u, std::size_t e) {
  return detail::edge_sum(u.disc(), u.dofs(), e, [](double a, double b, double h) { return p1::int_deriv_sq(a, b, h); });
}

/// Rescales u to the prescribed mass; mass is quadratic so this is exact up
/// to one rounding.
inline std::vector<double> rescale_to_mass(const Discretization& d, std::vector<double> u, double mu) {
  const double m = detail::mass(d, u);
  if (!(m > 0.0)) throw std::domain_error("cannot rescale a zero function to positive mass");
  const double c = std::sqrt(mu / m);
  for (double& x : u) x *= c;
  return u;
}

inline GraphFunction with_mass(const GraphFunction& u, double mu) {
  std::vector<double> v(u.dofs().begin(), u.dofs().end());
  return GraphFunction(u.discretization(), rescale_to_mass(u.disc(), std::move(v), mu));
}

/// Measure of the smallest superlevel set carrying half of the mass
/// (cells ranked by their mass density). Concentrating profiles shrink it.
inline double half_mass_width(const Discretization& d, std::span<const double> u) {
  struct Cell {
    double density, length, mass;
  };
  std::vector<Cell> cells;
  cells.reserve(d.cell_count());
  for (std::size_t e = 0; e < d.edge_count(); ++e) {
    const auto& eg = d.edge_grid(e);
    for (std::size_t k = 0; k < eg.cells; ++k) {
      const std::size_t l = d.node_dof(e, k), r = d.node_dof(e, k + 1);
      const double a = l == kNoDof ? 0.0 : u[l];
      const double b = r == kNoDof ? 0.0 : u[r];
      const double m = p1::int_sq(a, b, eg.h);
      cells.push_back({m / eg.h, eg.h, m});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) { return x.density > y.density; });
  double total = 0.0;
  for (const auto& c : cells) total += c.mass;
  double acc = 0.0, width = 0.0;
  for (const auto& c : cells) {
    if (acc >= 0.5 * total) break;
    const double need = 0.5 * total - acc;
    if (c.mass >= need && c.mass > 0.0) {
      width += c.length * need / c.mass;
      break;
    }
    acc += c.mass;
    width += c.length;
  }
  return width;
}

inline double half_mass_width(const GraphFunction& u) { return half_mass_width(u.disc(), u.dofs()); }

/// Error raised when a function is not supported where an operation needs it.
class SupportError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mass-preserving concentration u_lambda(s) = sqrt(lambda) u(lambda s) on a
/// half-line (s measured from its vertex) or a terminal edge (s measured from
/// the tip). u must live on that edge up to 1e-12 of mass.
inline GraphFunction concentrate(const GraphFunction& u, double lambda, std::size_t edge) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("concentrate: lambda must be >= 1");
  const auto& d = u.disc();
  const auto& g = d.graph();
  const Edge& ed = g.edge(edge);
  bool from_tip = false;  // coordinate origin at `to` when the tip sits there
  if (!ed.is_half_line()) {
    if (g.degree(ed.to) == 1 && !ed.is_loop())
      from_tip = true;
    else if (g.degree(ed.from) != 1)
      throw std::invalid_argument("concentrate: edge '" + ed.id + "' is neither a half-line nor a terminal edge");
  }
  const double total = mass(u);
  std::string offenders;
  for (std::size_t e = 0; e < d.edge_count(); ++e) {
    if (e == edge) continue;
    const double m = edge_mass(u, e);
    if (m > 1e-12 * std::max(1.0, total)) offenders += (offenders.empty() ? "" : ", ") + g.edge(e).id;
  }
  if (!offenders.empty())
    throw SupportError("concentrate: function has mass on edges other than '" + ed.id + "': " + offenders);

  const auto& eg = d.edge_grid(edge);
  std::vector<double> v(d.dof_count(), 0.0);
  const double amp = std::sqrt(lambda);
  for (std::size_t k = 0; k <= eg.cells; ++k) {
    const std::size_t dof = d.node_dof(edge, k);
    if (dof == kNoDof) continue;
    const double x = d.node_position(edge, k);
    double val;
    if (from_tip) {
      const double s = eg.length - x;
      const double src = eg.length - lambda * s;
      val = src <= 0.0 ? 0.0 : u.value_at(edge, src);
    } else {
      const double src = lambda * x;
      val = src >= eg.length ? 0.0 : u.value_at(edge, src);
    }
    v[dof] = amp * val;
  }
  // Resampling the compressed profile on the same mesh perturbs the mass at
  // O(h^2); restore the exact input mass.
  if (detail::mass(d, v) > 0.0) v = rescale_to_mass(d, std::move(v), total);
  return GraphFunction(u.discretization(), std::move(v));
}

}  // namespace qgraph
