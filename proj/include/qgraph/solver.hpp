#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgraph/discretization.hpp"
#include "qgraph/functionals.hpp"
#include "qgraph/parallel.hpp"
#include "qgraph/random_fields.hpp"
#include "qgraph/reference.hpp"
#include "qgraph/topology.hpp"

namespace qgraph {

enum class SolverStatus { Converged, UnboundedBelowDetected, MaxIters };

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged: return "Converged";
    case SolverStatus::UnboundedBelowDetected: return "UnboundedBelowDetected";
    case SolverStatus::MaxIters: return "MaxIters";
  }
  return "?";
}

struct SolverConfig {
  std::size_t max_iters = 3000;
  double tol = 1e-6;  ///< on stationary_residual
  double armijo = 1e-4;
  double initial_step = 1.0;
  double max_step = 64.0;
  double E_cut = 50.0;
  double width_factor = 6.0;  ///< concentration threshold in units of the finest mesh step
  std::size_t multi_start = 4;  ///< random fields among the default starts
  std::size_t starts_per_family = 2;
  std::uint64_t seed = 1;
  bool probe = true;
  double probe_lambda_max = 512.0;
  std::size_t stall_window = 300;
  double stall_rel = 1e-10;
  std::size_t workers = 1;
  GridSpec grid;

  void validate() const {
    if (!(tol > 0.0) || !(E_cut > 0.0) || !(width_factor > 0.0)) throw std::invalid_argument("solver tolerances must be positive");
    if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("Armijo parameter must lie in (0, 1)");
    if (!(initial_step > 0.0) || !(max_step >= initial_step)) throw std::invalid_argument("bad step bounds");
    if (max_iters == 0 || starts_per_family == 0) throw std::invalid_argument("iteration and start counts must be positive");
    grid.validate();
  }
};

struct IterationRecord {
  std::size_t iter = 0;
  double energy = 0.0;
  double residual = 0.0;
  double omega = 0.0;
  double step = 0.0;
};

/// Energies of a mass-preserving concentration family u_lambda.
struct ProbeResult {
  bool detected = false;
  std::string kind;  ///< "interior" (away from vertices, on a half-line) or "tip"
  std::size_t edge = 0;
  std::vector<double> lambdas;
  std::vector<double> energies;
  std::vector<double> widths;
  /// E(u_2) / (4 E(u_1)); 1 for exact quadratic scaling.
  double scaling_ratio = std::numeric_limits<double>::quiet_NaN();
  GraphFunction u;
};

struct InitialGuess {
  std::string family;  ///< spread, soliton, tip, random, user
  std::string label;
  GraphFunction u;
};

struct GroundStateResult {
  GraphFunction u;
  EnergyBreakdown energy;
  double omega = 0.0;
  double residual = 0.0;
  SolverStatus status = SolverStatus::MaxIters;
  std::size_t iterations = 0;
  std::vector<IterationRecord> log;
  std::string init_label;
  std::optional<ProbeResult> probe;
  /// Lowest energy met by any start (converged or not). Every discrete state
  /// is an H^1 function of mass mu, so this bounds the energy level from above.
  double best_energy = 0.0;
};

/// Factored H^1-type operator  K + sigma C  (stiffness plus shifted mass).
/// Gradients measured in its inner product do not stiffen as h -> 0.
class SobolevPreconditioner {
 public:
  SobolevPreconditioner(const Discretization& d, double sigma) {
    using T = Eigen::Triplet<double>;
    std::vector<T> kt, ct;
    for (std::size_t e = 0; e < d.edge_count(); ++e) {
      const auto& eg = d.edge_grid(e);
      for (std::size_t k = 0; k < eg.cells; ++k) {
        const std::size_t a = d.node_dof(e, k), b = d.node_dof(e, k + 1);
        const double s = 1.0 / eg.h, m0 = eg.h / 3.0, m1 = eg.h / 6.0;
        const auto ia = static_cast<int>(a), ib = static_cast<int>(b);
        if (a != kNoDof) {
          kt.emplace_back(ia, ia, s);
          ct.emplace_back(ia, ia, m0);
        }
        if (b != kNoDof) {
          kt.emplace_back(ib, ib, s);
          ct.emplace_back(ib, ib, m0);
        }
        if (a != kNoDof && b != kNoDof) {
          kt.emplace_back(ia, ib, -s);
          kt.emplace_back(ib, ia, -s);
          ct.emplace_back(ia, ib, m1);
          ct.emplace_back(ib, ia, m1);
        }
      }
    }
    const auto n = static_cast<int>(d.dof_count());
    stiff_.resize(n, n);
    mass_.resize(n, n);
    stiff_.setFromTriplets(kt.begin(), kt.end());
    mass_.setFromTriplets(ct.begin(), ct.end());
    Eigen::SparseMatrix<double> p = stiff_ + sigma * mass_;
    ldlt_.analyzePattern(p);
    refactor(sigma);
  }

  void refactor(double sigma) {
    sigma_ = sigma;
    Eigen::SparseMatrix<double> p = stiff_ + sigma * mass_;
    ldlt_.factorize(p);
    if (ldlt_.info() != Eigen::Success) throw std::runtime_error("preconditioner factorization failed");
  }

  double sigma() const { return sigma_; }

  std::vector<double> solve(std::span<const double> rhs) const {
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Eigen::VectorXd x = ldlt_.solve(b);
    return {x.data(), x.data() + x.size()};
  }

 private:
  Eigen::SparseMatrix<double> stiff_, mass_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  double sigma_ = 1.0;
};

namespace detail {

struct FlowOutcome {
  std::vector<double> u;
  SolverStatus status = SolverStatus::MaxIters;
  std::vector<IterationRecord> log;
};

inline double clamp_sigma(double omega) { return std::clamp(omega, 1e-3, 1e2); }

/// Normalized gradient flow on the sphere {mass = mu}: preconditioned descent
/// direction projected to the tangent space, Armijo backtracking on the
/// renormalized trial point.
inline FlowOutcome normalized_flow(const Discretization& d, std::vector<double> u, double mu, const SolverConfig& cfg) {
  FlowOutcome out;
  u = rescale_to_mass(d, std::move(u), mu);
  const double hmin = d.min_step();
  auto omega_of = [&](std::span<const double> v) { return (sextic(d, v) - kinetic(d, v)) / mu; };
  double E = energy_total(d, u);
  double omega = omega_of(u);
  SobolevPreconditioner pre(d, clamp_sigma(omega));
  double tau = cfg.initial_step;
  std::vector<double> trial(u.size());
  std::vector<double> history;

  for (std::size_t it = 0;; ++it) {
    const double res = stationary_residual(d, u, omega);
    out.log.push_back({it, E, res, omega, tau});
    if (res <= cfg.tol) {
      out.status = SolverStatus::Converged;
      break;
    }
    if (E < -cfg.E_cut && half_mass_width(d, u) < cfg.width_factor * hmin) {
      out.status = SolverStatus::UnboundedBelowDetected;
      break;
    }
    if (it >= cfg.max_iters) break;
    history.push_back(E);
    if (history.size() > cfg.stall_window) {
      const double old = history[history.size() - 1 - cfg.stall_window];
      if (old - E <= cfg.stall_rel * std::max(1.0, std::abs(E))) break;
    }

    const double target = clamp_sigma(omega);
    if (target > 4.0 * pre.sigma() || target < 0.25 * pre.sigma()) pre.refactor(target);
    const auto g = energy_weak_gradient(d, u);
    const auto cu = mass_apply(d, u);
    const auto z = pre.solve(g);
    const auto w = pre.solve(cu);
    const double beta = dot(cu, z) / dot(cu, w);
    std::vector<double> dir(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) dir[i] = -(z[i] - beta * w[i]);
    const double slope = dot(g, dir);
    if (!(slope < 0.0)) break;

    bool accepted = false;
    bool first = true;
    double Et = E;
    while (tau > 1e-14) {
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + tau * dir[i];
      trial = rescale_to_mass(d, std::move(trial), mu);
      Et = energy_total(d, trial);
      if (Et <= E + cfg.armijo * tau * slope) {
        accepted = true;
        break;
      }
      tau *= 0.5;
      first = false;
    }
    if (!accepted) break;
    std::swap(u, trial);
    E = Et;
    omega = omega_of(u);
    if (first) tau = std::min(2.0 * tau, cfg.max_step);
  }
  out.u = std::move(u);
  return out;
}

/// max(phi(x - c) - phi(cut), 0): a soliton bump with compact support.
inline double clipped_soliton(double lambda, double x, double cut) {
  return std::max(soliton(lambda, x) - soliton(lambda, cut), 0.0);
}

}  // namespace detail

/// Concentrates a bump of mass mu by u -> sqrt(lambda) u(lambda x) for
/// lambda = 1, 2, 4, ... and reports whether the energy passes -E_cut while
/// the half-mass width drops below width_factor * h. Two families: a soliton
/// inside a half-line (negative energy iff mu > mu_R) and a half-soliton at
/// each tip (negative iff mu > mu_R+).
inline std::vector<ProbeResult> concentration_probe(const DiscretizationPtr& disc, double mu, const SolverConfig& cfg) {
  const auto& d = *disc;
  const auto& g = d.graph();
  const double threshold = cfg.width_factor * d.min_step();
  std::vector<ProbeResult> out;

  auto run = [&](ProbeResult pr, GraphFunction base) {
    base = with_mass(base, mu);
    for (double lambda = 1.0; lambda <= cfg.probe_lambda_max; lambda *= 2.0) {
      GraphFunction v = lambda == 1.0 ? base : concentrate(base, lambda, pr.edge);
      const double E = energy(v).total;
      const double w = half_mass_width(v);
      pr.lambdas.push_back(lambda);
      pr.energies.push_back(E);
      pr.widths.push_back(w);
      pr.u = v;
      if (pr.energies.size() == 2) pr.scaling_ratio = pr.energies[1] / (4.0 * pr.energies[0]);
      if (E < -cfg.E_cut && w < threshold && pr.energies.size() >= 2) {
        pr.detected = true;
        break;
      }
      if (E >= 0.0 && lambda >= 2.0) break;  // positive energies only grow
    }
    out.push_back(std::move(pr));
  };

  const auto halves = g.half_lines();
  if (!halves.empty()) {
    const std::size_t e = halves.front();
    const double L = d.edge_grid(e).length;
    ProbeResult pr;
    pr.kind = "interior";
    pr.edge = e;
    run(pr, GraphFunction::sample(disc, [&](std::size_t f, double x) {
          return f == e ? detail::clipped_soliton(1.0, x - 0.5 * L, 0.25 * L) : 0.0;
        }));
  }
  for (std::size_t v : terminal_points(g)) {
    std::size_t e = 0;
    for (; e < g.edge_count(); ++e)
      if (g.edge(e).from == v || g.edge(e).to == v) break;
    const auto& eg = d.edge_grid(e);
    const bool at_from = g.edge(e).from == v;
    // Half-soliton whose bump fits in the first half of the edge.
    const double reach = 0.5 * eg.length;
    const double lambda0 = std::max(1.0, 8.0 / reach);
    ProbeResult pr;
    pr.kind = "tip";
    pr.edge = e;
    run(pr, GraphFunction::sample(disc, [&](std::size_t f, double x) {
          if (f != e) return 0.0;
          const double s = at_from ? x : eg.length - x;
          return detail::clipped_soliton(lambda0, s, reach);
        }));
  }
  return out;
}

/// sqrt(eps) phi(eps x) on every half-line and sqrt(eps) on the compact core,
/// lowered by its value at the truncation so it reaches zero continuously.
inline GraphFunction spread_profile(const DiscretizationPtr& disc, double eps) {
  const auto& d = *disc;
  const auto& g = d.graph();
  double L = kInfiniteLength;
  for (std::size_t e : g.half_lines()) L = std::min(L, d.edge_grid(e).length);
  const double a = std::sqrt(eps);
  const double floor = a * soliton(1.0, eps * L);
  return GraphFunction::sample(disc, [&](std::size_t e, double x) {
    const auto& eg = d.edge_grid(e);
    const double v = g.edge(e).is_half_line() ? a * soliton(1.0, eps * x * L / eg.length) : a;
    return std::max(v - floor, 0.0);
  });
}

/// Starting points of mass mu: the flat-plus-spread family, solitons of the
/// graph distance centred at vertices, edge midpoints and half-line midpoints,
/// half-solitons at tips, and `count` seeded random positive fields.
inline std::vector<InitialGuess> default_inits(const DiscretizationPtr& disc, double mu, std::size_t count,
                                               std::uint64_t seed = 1) {
  if (count == 0) throw std::invalid_argument("default_inits: count must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("default_inits: mass must be positive");
  const auto& d = *disc;
  const auto& g = d.graph();
  std::vector<InitialGuess> out;
  auto add = [&](std::string family, std::string label, const GraphFunction& u) {
    out.push_back({std::move(family), std::move(label), with_mass(u, mu)});
  };

  double L = kInfiniteLength;
  for (std::size_t e : g.half_lines()) L = std::min(L, d.edge_grid(e).length);
  for (double eps = 0.5; eps * L >= 8.0 && eps >= 1.0 / 64.0; eps *= 0.5) {
    add("spread", "eps=" + std::to_string(eps), spread_profile(disc, eps));
  }

  auto soliton_at = [&](std::size_t e, double x0, double lambda) {
    const auto dist = distance_field(d, e, x0);
    std::vector<double> v(dist.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = soliton(lambda, dist[i]);
    return GraphFunction(disc, std::move(v));
  };
  const auto tips = terminal_points(g);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    std::size_t e = 0;
    while (g.edge(e).from != v && g.edge(e).to != v) ++e;
    const double x0 = g.edge(e).from == v ? 0.0 : d.edge_grid(e).length;
    const bool tip = std::find(tips.begin(), tips.end(), v) != tips.end();
    for (double lambda : {1.0, 2.0})
      add(tip ? "tip" : "soliton", "vertex " + g.vertices()[v] + " lambda=" + std::to_string(lambda),
          soliton_at(e, x0, lambda));
  }
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const double mid = 0.5 * d.edge_grid(e).length;
    for (double lambda : {1.0, 2.0})
      add("soliton", "edge " + g.edge(e).id + " mid lambda=" + std::to_string(lambda), soliton_at(e, mid, lambda));
  }

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i)
    add("random", "random " + std::to_string(i), random_bump_field(disc, rng).abs());
  return out;
}

/// Keeps the `per_family` lowest-energy starts of each family, in input order.
inline std::vector<InitialGuess> select_starts(std::vector<InitialGuess> inits, std::size_t per_family) {
  std::vector<InitialGuess> out;
  std::vector<std::string> families;
  for (const auto& s : inits)
    if (std::find(families.begin(), families.end(), s.family) == families.end()) families.push_back(s.family);
  std::vector<bool> keep(inits.size(), false);
  for (const auto& f : families) {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < inits.size(); ++i)
      if (inits[i].family == f) ranked.push_back({energy(inits[i].u).total, i});
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < std::min(per_family, ranked.size()); ++k) keep[ranked[k].second] = true;
  }
  for (std::size_t i = 0; i < inits.size(); ++i)
    if (keep[i]) out.push_back(std::move(inits[i]));
  return out;
}

namespace detail {

inline GroundStateResult finish(const GraphFunction& u, SolverStatus status, std::vector<IterationRecord> log,
                                std::string label) {
  GroundStateResult r;
  r.u = u;
  r.energy = energy(u);
  r.omega = omega_estimate(u);
  r.residual = stationary_residual(u, r.omega);
  r.status = status;
  r.iterations = log.empty() ? 0 : log.back().iter;
  r.log = std::move(log);
  r.init_label = std::move(label);
  r.best_energy = r.energy.total;
  return r;
}

}  // namespace detail

/// Minimizes the energy over {mass = mu} from every given start and returns
/// the lowest converged result (the lowest of all when none converged).
/// Concentration probes run first; a firing probe, or a flow that
/// concentrates below -E_cut, yields UnboundedBelowDetected.
inline GroundStateResult minimize_at_mass(const MetricGraph& G, double mu, const SolverConfig& cfg,
                                          const std::vector<InitialGuess>& inits) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("minimize_at_mass: mass must be positive");
  if (inits.empty()) throw std::invalid_argument("minimize_at_mass: no initial functions");
  cfg.validate();
  const auto disc = inits.front().u.discretization();
  for (const auto& s : inits)
    if (s.u.discretization() != disc) throw std::invalid_argument("minimize_at_mass: starts live on different meshes");
  if (disc->graph().name() != G.name() || disc->graph().edge_count() != G.edge_count())
    throw std::invalid_argument("minimize_at_mass: starts are not defined on graph '" + G.name() + "'");

  if (cfg.probe) {
    for (auto& pr : concentration_probe(disc, mu, cfg)) {
      if (!pr.detected) continue;
      std::vector<IterationRecord> log;
      for (std::size_t k = 0; k < pr.energies.size(); ++k) log.push_back({k, pr.energies[k], 0.0, 0.0, pr.lambdas[k]});
      auto r = detail::finish(pr.u, SolverStatus::UnboundedBelowDetected, std::move(log), "probe " + pr.kind);
      r.probe = std::move(pr);
      return r;
    }
  }

  const auto& d = *disc;
  auto runs = parallel_map<detail::FlowOutcome>(inits.size(), cfg.workers, [&](std::size_t i) {
    const auto dofs = inits[i].u.dofs();
    return detail::normalized_flow(d, std::vector<double>(dofs.begin(), dofs.end()), mu, cfg);
  });

  std::optional<std::size_t> best;
  auto energy_of = [&](std::size_t i) { return runs[i].log.back().energy; };
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].status == SolverStatus::UnboundedBelowDetected)
      return detail::finish(GraphFunction(disc, runs[i].u), runs[i].status, runs[i].log, inits[i].label);
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].status == SolverStatus::Converged && (!best || energy_of(i) < energy_of(*best))) best = i;
  if (!best)
    for (std::size_t i = 0; i < runs.size(); ++i)
      if (!best || energy_of(i) < energy_of(*best)) best = i;
  double lowest = energy_of(0);
  for (std::size_t i = 1; i < runs.size(); ++i) lowest = std::min(lowest, energy_of(i));
  auto& r = runs[*best];
  auto out = detail::finish(GraphFunction(disc, std::move(r.u)), r.status, std::move(r.log), inits[*best].label);
  out.best_energy = std::min(lowest, out.energy.total);
  return out;
}

/// Default starts on a fresh mesh of G.
inline GroundStateResult minimize_at_mass(const MetricGraph& G, double mu, const SolverConfig& cfg) {
  const auto disc = discretize(G, cfg.grid);
  return minimize_at_mass(G, mu, cfg, select_starts(default_inits(disc, mu, cfg.multi_start, cfg.seed), cfg.starts_per_family));
}

/// "Energy zero" tolerance tied to the measured soliton defect on the grid.
inline double energy_budget(const GridSpec& grid) {
  return std::max(1e-3, 10.0 * std::abs(soliton_energy_defect(1.0, grid.trunc_L, grid.step_h)));
}

struct EnergyScan {
  std::vector<double> masses;
  std::vector<double> energies;
  std::vector<SolverStatus> statuses;
  std::vector<double> omegas;
  std::vector<double> residuals;
  std::vector<std::string> errors;  ///< empty string when the point ran
  double budget = 0.0;
  std::optional<double> bracket_lower;  ///< last mass with energy >= -budget before the first negative one
  std::optional<double> bracket_upper;  ///< first mass with energy < -budget
  std::optional<double> unbounded_onset;
};

inline EnergyScan energy_scan(const MetricGraph& G, const std::vector<double>& grid, const SolverConfig& cfg) {
  if (grid.empty()) throw std::invalid_argument("energy_scan: empty mass grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument("energy_scan: masses must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("energy_scan: grid must be strictly increasing");
  }
  EnergyScan s;
  s.masses = grid;
  s.budget = energy_budget(cfg.grid);
  struct Point {
    GroundStateResult r;
    std::string error;
  };
  SolverConfig inner = cfg;
  inner.workers = 1;
  auto pts = parallel_map<Point>(grid.size(), cfg.workers, [&](std::size_t i) {
    Point p;
    try {
      p.r = minimize_at_mass(G, grid[i], inner);
    } catch (const std::exception& ex) {
      p.error = ex.what();
    }
    return p;
  });
  for (auto& p : pts) {
    const bool ok = p.error.empty();
    s.energies.push_back(ok ? p.r.best_energy : std::numeric_limits<double>::quiet_NaN());
    s.statuses.push_back(ok ? p.r.status : SolverStatus::MaxIters);
    s.omegas.push_back(ok ? p.r.omega : std::numeric_limits<double>::quiet_NaN());
    s.residuals.push_back(ok ? p.r.residual : std::numeric_limits<double>::quiet_NaN());
    s.errors.push_back(p.error);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (s.statuses[i] == SolverStatus::UnboundedBelowDetected && !s.unbounded_onset) s.unbounded_onset = grid[i];
    const bool negative = s.statuses[i] == SolverStatus::UnboundedBelowDetected || s.energies[i] < -s.budget;
    if (negative && !s.bracket_upper) {
      s.bracket_upper = grid[i];
      if (i > 0 && s.energies[i - 1] >= -s.budget) s.bracket_lower = grid[i - 1];
    }
  }
  return s;
}

/// (E(sqrt(mu/m) u), (mu/m) E(u)) for m = mass(u); the first is strictly
/// smaller whenever mu > m and u has nonzero sextic term.
inline std::pair<double, double> scaling_subhomogeneity_check(const GraphFunction& u, double mu_target) {
  const double m = mass(u);
  const auto e = energy(u);
  if (!(m > 0.0) || !(e.potential > 0.0)) throw std::invalid_argument("scaling check: u must have positive mass and L6 norm");
  if (e.total > 0.0) throw std::invalid_argument("scaling check: needs E(u) <= 0");
  if (mu_target < m * (1.0 - 1e-12)) throw std::invalid_argument("scaling check: target mass below mass(u)");
  const double t = mu_target / m;
  return {energy(u.scaled(std::sqrt(t))).total, t * e.total};
}

}  // namespace qgraph
