#include <gtest/gtest.h>

#include "common.hpp"

using namespace qgraph;

namespace {

SolverConfig quick(double h, double L) {
  SolverConfig c;
  c.grid = {h, L};
  c.multi_start = 1;
  c.starts_per_family = 1;
  return c;
}

}  // namespace

// Energies from an independent shooting computation on the tadpole
// (loop 2 pi, one half-line), accurate to about 1e-7.
TEST(Solver, TadpoleAgainstShooting) {
  const auto g = fixture("tadpole");
  const auto cfg = quick(2e-2, 80.0);
  for (auto [mu, E] : {std::pair{1.8, -1.8046e-3}, std::pair{2.2, -8.149e-3}}) {
    const auto r = minimize_at_mass(g, mu, cfg);
    EXPECT_EQ(r.status, SolverStatus::Converged) << mu;
    EXPECT_NEAR(r.energy.total, E, 0.01 * std::abs(E)) << mu;
    EXPECT_NEAR(r.energy.mass, mu, 1e-9);
    EXPECT_LT(r.residual, 1e-3);
    EXPECT_GT(r.omega, 0.0);
  }
}

TEST(Solver, SupercriticalProbesFire) {
  const auto cfg = quick(1e-2, 40.0);
  const auto tip = minimize_at_mass(fixture("half_line"), 1.6, cfg);
  EXPECT_EQ(tip.status, SolverStatus::UnboundedBelowDetected);
  ASSERT_TRUE(tip.probe);
  EXPECT_EQ(tip.probe->kind, "tip");
  const auto line = minimize_at_mass(fixture("line"), 3.0, cfg);
  EXPECT_EQ(line.status, SolverStatus::UnboundedBelowDetected);
  ASSERT_TRUE(line.probe);
  EXPECT_EQ(line.probe->kind, "interior");
  // energies roughly quadruple per doubling of lambda
  EXPECT_NEAR(line.probe->scaling_ratio, 1.0, 0.05);
}

TEST(Solver, InputValidation) {
  const auto g = fixture("tadpole");
  SolverConfig cfg = quick(1e-1, 20.0);
  EXPECT_THROW(minimize_at_mass(g, -1.0, cfg), std::invalid_argument);
  EXPECT_THROW(energy_scan(g, {}, cfg), std::invalid_argument);
  EXPECT_THROW(energy_scan(g, {1.0, 1.0}, cfg), std::invalid_argument);
  EXPECT_THROW(energy_scan(g, {0.0, 1.0}, cfg), std::invalid_argument);
  cfg.armijo = 2.0;
  EXPECT_THROW(minimize_at_mass(g, 1.0, cfg), std::invalid_argument);
  cfg = quick(1e-1, 5.0);
  EXPECT_THROW(minimize_at_mass(g, 1.0, cfg), std::invalid_argument);
}

TEST(Solver, EnergyBudgetFloor) {
  EXPECT_DOUBLE_EQ(energy_budget({1e-2, 200.0}), 1e-3);
  EXPECT_GT(energy_budget({0.5, 10.0}), 1e-3);
}

TEST(GN, LineConstantFromBelow) {
  GNConfig cfg;
  cfg.grid = {2e-2, 60.0};
  cfg.random_starts = 1;
  cfg.starts_per_family = 1;
  const auto g = fixture("line");
  const auto est = maximize_quotient(g, cfg);
  // discrete states are admissible, so the quotient stays below 4 / pi^2
  EXPECT_LE(est.K_lower, Constants::K_R + 1e-9);
  EXPECT_GT(est.K_lower, Constants::K_R - 2e-3);
  EXPECT_NEAR(est.mu_upper, std::sqrt(3.0 / est.K_lower), 1e-12);
  const auto rep = consistency_report(g, est, classify(g));
  EXPECT_FALSE(rep.violation);
}

TEST(GN, QuotientScaleInvariant) {
  auto disc = discretize(fixture("signpost"), {0.05, 20.0});
  std::mt19937_64 rng(11);
  const auto u = random_bump_field(disc, rng, true);
  const double q = gn_quotient(u);
  EXPECT_NEAR(gn_quotient(u.scaled(-3.5)), q, 1e-12 * q);
  EXPECT_LE(q, Constants::K_R_plus);
}
