#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qgraph/functionals.hpp"
#include "qgraph/reference.hpp"
#include "qgraph/solver.hpp"
#include "qgraph/topology.hpp"

namespace qgraph {

struct GNConfig {
  std::size_t max_iters = 600;
  double armijo = 1e-4;
  std::size_t stall_window = 40;
  double stall_rel = 1e-8;
  std::size_t random_starts = 4;
  std::size_t starts_per_family = 3;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  GridSpec grid{1e-2, 200.0};
  /// Spread family eps = 2^-k, k = 0..eps_levels, while eps * L >= eps_reach.
  int eps_levels = 10;
  double eps_reach = 4.0;
};

struct GNRun {
  std::string family;
  std::string label;
  double epsilon = std::numeric_limits<double>::quiet_NaN();  ///< spread parameter when family == spread
  double initial_quotient = 0.0;
  double final_quotient = 0.0;
  std::size_t iterations = 0;
  bool improved = false;
};

struct GNEstimate {
  double K_lower = 0.0;
  GraphFunction maximizer;
  double mu_upper = 0.0;
  std::optional<double> K_exact;
  std::optional<double> mu_exact;
  std::string family;  ///< family of the winning start
  std::string label;
  std::optional<double> epsilon;
  /// The winning spread parameter is the smallest the truncation allows.
  bool truncation_limited = false;
  std::vector<GNRun> runs;
};

namespace detail {

struct AscentOutcome {
  std::vector<double> u;
  double quotient = 0.0;
  std::size_t iterations = 0;
};

inline double log_quotient(const Discretization& d, std::span<const double> u) {
  const double m = mass(d, u), k = kinetic(d, u), p = sextic(d, u);
  return std::log(p) - 2.0 * std::log(m) - std::log(k);
}

/// Preconditioned ascent of log Q = log P - 2 log M - log K with the mass
/// renormalized to one after every step (Q is scale invariant).
inline AscentOutcome quotient_ascent(const Discretization& d, std::vector<double> u, const GNConfig& cfg) {
  u = rescale_to_mass(d, std::move(u), 1.0);
  auto sigma_of = [&](std::span<const double> v) { return std::clamp(kinetic(d, v), 1e-3, 1e2); };
  SobolevPreconditioner pre(d, sigma_of(u));
  double q = log_quotient(d, u);
  double tau = 1.0;
  std::vector<double> trial(u.size()), history;
  std::size_t it = 0;
  for (; it < cfg.max_iters; ++it) {
    history.push_back(q);
    if (history.size() > cfg.stall_window && q - history[history.size() - 1 - cfg.stall_window] <= cfg.stall_rel) break;
    const double s = sigma_of(u);
    if (s > 4.0 * pre.sigma() || s < 0.25 * pre.sigma()) pre.refactor(s);
    const double m = mass(d, u), k = kinetic(d, u), p = sextic(d, u);
    const auto gp = sextic_weak_gradient(d, u);
    const auto gk = kinetic_weak_gradient(d, u);
    const auto cu = mass_apply(d, u);
    std::vector<double> g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = gp[i] / p - 4.0 * cu[i] / m - gk[i] / k;
    const auto dir = pre.solve(g);
    const double slope = dot(g, dir);
    if (!(slope > 0.0)) break;
    bool accepted = false, first = true;
    double qt = q;
    while (tau > 1e-14) {
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + tau * dir[i];
      trial = rescale_to_mass(d, std::move(trial), 1.0);
      qt = log_quotient(d, trial);
      if (qt >= q + cfg.armijo * tau * slope) {
        accepted = true;
        break;
      }
      tau *= 0.5;
      first = false;
    }
    if (!accepted) break;
    std::swap(u, trial);
    q = qt;
    if (first) tau = std::min(2.0 * tau, 64.0);
  }
  return {std::move(u), std::exp(q), it};
}

}  // namespace detail

/// Best Gagliardo-Nirenberg quotient found by ascent from the solver's start
/// families and the spread family. Each candidate is an H^1 function, so
/// K_lower never exceeds the true constant.
inline GNEstimate maximize_quotient(const MetricGraph& G, const GNConfig& cfg) {
  cfg.grid.validate();
  const auto disc = discretize(G, cfg.grid);
  const auto& d = *disc;
  auto starts = default_inits(disc, 1.0, std::max<std::size_t>(1, cfg.random_starts), cfg.seed);
  std::erase_if(starts, [](const InitialGuess& s) { return s.family == "spread"; });
  starts = select_starts(std::move(starts), cfg.starts_per_family);

  double L = kInfiniteLength;
  for (std::size_t e : G.half_lines()) L = std::min(L, d.edge_grid(e).length);
  std::vector<double> eps_of(starts.size(), std::numeric_limits<double>::quiet_NaN());
  double smallest_eps = 1.0;
  for (int k = 0; k <= cfg.eps_levels; ++k) {
    const double eps = std::ldexp(1.0, -k);
    if (eps * L < cfg.eps_reach) break;
    smallest_eps = eps;
    starts.push_back({"spread", "eps=2^-" + std::to_string(k), with_mass(spread_profile(disc, eps), 1.0)});
    eps_of.push_back(eps);
  }

  auto quotient = [&](const GraphFunction& u) { return gn_quotient(u); };
  auto outs = parallel_map<detail::AscentOutcome>(starts.size(), cfg.workers, [&](std::size_t i) {
    const auto dofs = starts[i].u.dofs();
    return detail::quotient_ascent(d, std::vector<double>(dofs.begin(), dofs.end()), cfg);
  });

  GNEstimate est;
  std::size_t best = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    GNRun run;
    run.family = starts[i].family;
    run.label = starts[i].label;
    run.epsilon = eps_of[i];
    run.initial_quotient = quotient(starts[i].u);
    run.final_quotient = outs[i].quotient;
    run.iterations = outs[i].iterations;
    run.improved = run.final_quotient > run.initial_quotient;
    est.runs.push_back(run);
    if (run.final_quotient > est.runs[best].final_quotient) best = i;
  }
  est.maximizer = GraphFunction(disc, std::move(outs[best].u));
  est.K_lower = gn_quotient(est.maximizer);
  est.mu_upper = std::sqrt(3.0 / est.K_lower);
  est.family = est.runs[best].family;
  est.label = est.runs[best].label;
  if (!std::isnan(eps_of[best])) {
    est.epsilon = eps_of[best];
    est.truncation_limited = eps_of[best] == smallest_eps;
  }
  const auto cm = critical_mass_exact(classify(G));
  est.K_exact = cm.exact_gn_constant();
  est.mu_exact = cm.exact;
  return est;
}

struct ConsistencyReport {
  TopologyTag tag = TopologyTag::Other;
  double K_lower = 0.0;
  double mu_upper = 0.0;
  std::optional<double> K_exact;
  double budget = 0.0;
  bool violation = false;  ///< K_lower exceeds the exact constant beyond budget
  bool within_universal_bounds = false;  ///< K_R - budget <= K_lower <= K_R+ + budget
  /// mu_R - mu_upper; positive means the estimate certifies mu_G < mu_R.
  double margin_below_mu_R = 0.0;
  std::string summary;
};

inline ConsistencyReport consistency_report(const MetricGraph& G, const GNEstimate& est, const TopologyClass& tc,
                                            double budget = 1e-3) {
  (void)G;
  ConsistencyReport r;
  r.tag = tc.tag;
  r.K_lower = est.K_lower;
  r.mu_upper = est.mu_upper;
  r.budget = budget;
  r.K_exact = critical_mass_exact(tc).exact_gn_constant();
  r.violation = r.K_exact && est.K_lower > *r.K_exact + budget;
  r.within_universal_bounds = est.K_lower >= Constants::K_R - budget && est.K_lower <= Constants::K_R_plus + budget;
  r.margin_below_mu_R = Constants::mu_R - est.mu_upper;
  char buf[256];
  if (r.K_exact) {
    std::snprintf(buf, sizeof buf, "case (%s): K_lower = %.6f vs exact %.6f (gap %.3e) -> %s", case_letter(tc.tag),
                  est.K_lower, *r.K_exact, *r.K_exact - est.K_lower, r.violation ? "VIOLATION" : "consistent");
  } else {
    std::snprintf(buf, sizeof buf, "case (%s): K_lower = %.6f, mu_upper = %.6f, mu_R - mu_upper = %.4e (%s)",
                  case_letter(tc.tag), est.K_lower, est.mu_upper, r.margin_below_mu_R,
                  r.margin_below_mu_R > 0.0 ? "detected mu_G < mu_R" : "no margin detected");
  }
  r.summary = buf;
  return r;
}

}  // namespace qgraph
