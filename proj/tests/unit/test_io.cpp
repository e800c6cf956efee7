#include <gtest/gtest.h>

#include "common.hpp"

using namespace qgraph;

TEST(Discretization, Layout) {
  const auto g = fixture("signpost");
  const Discretization d(g, {0.3, 10.0});
  const auto& stem = d.edge_grid(*g.find_edge("stem"));
  EXPECT_EQ(stem.cells, 4u);  // ceil(1 / 0.3)
  EXPECT_DOUBLE_EQ(stem.h, 0.25);
  const auto& left = d.edge_grid(0);
  EXPECT_DOUBLE_EQ(left.length, 10.0);
  EXPECT_EQ(d.node_dof(0, left.cells), kNoDof);
  EXPECT_EQ(d.node_dof(*g.find_edge("loop"), 0), d.node_dof(*g.find_edge("loop"), d.edge_grid(3).cells));
  double lumped = 0.0;
  for (double w : d.lumped_mass()) lumped += w;
  // pinned half-line ends carry h/2 each off the books
  EXPECT_NEAR(lumped, 20.0 + 2.0 - 2 * 0.5 * left.h, 1e-12);
  EXPECT_THROW(Discretization(g, {0.0, 10.0}), std::invalid_argument);
  EXPECT_THROW(Discretization(g, {0.1, 2.0}), std::invalid_argument);
}

TEST(Discretization, FunctionJsonRoundTrip) {
  const auto g = fixture("tadpole");
  auto disc = discretize(g, {0.07, 12.0});
  std::mt19937_64 rng(2);
  const auto u = random_bump_field(disc, rng, true);
  const auto j = nlohmann::json::parse(to_json(u).dump());
  const auto d2 = discretization_from_json(j, g);
  const auto v = function_from_json(j, d2);
  ASSERT_EQ(v.dofs().size(), u.dofs().size());
  for (std::size_t i = 0; i < u.dofs().size(); ++i) EXPECT_EQ(v.dofs()[i], u.dofs()[i]);
  EXPECT_EQ(grid_from_json(j).step_h, 0.07);
  auto other = discretize(g, {0.1, 12.0});
  EXPECT_THROW(function_from_json(j, other), std::invalid_argument);
  auto bad = j;
  bad["format"] = "x";
  EXPECT_THROW(function_from_json(bad, d2), std::invalid_argument);
}

TEST(Report, CsvHeaders) {
  EnergyScan s;
  s.masses = {1.0};
  s.energies = {-0.5};
  s.omegas = {0.1};
  s.residuals = {1e-7};
  s.statuses = {SolverStatus::Converged};
  s.errors = {""};
  EXPECT_EQ(scan_csv(s), "# qgraph.scan.v1\nmu,energy,omega,residual,status\n1,-0.5,0.10000000000000001,9.9999999999999995e-08,Converged\n");
  s.errors = {"boom"};
  EXPECT_NE(scan_csv(s).find(",Error\n"), std::string::npos);
  GNEstimate e;
  EXPECT_EQ(gn_csv(e), "# qgraph.gn.v1\nfamily,label,epsilon,initial_quotient,final_quotient,iterations\n");
}

TEST(Report, ProfileAndSvg) {
  auto disc = discretize(fixture("tadpole"), {0.5, 10.0});
  const auto u = GraphFunction::sample(disc, [](std::size_t, double x) { return std::exp(-x); });
  const auto csv = profile_csv(u, 4.0);
  EXPECT_EQ(csv.rfind("# qgraph.profile.v1\nedge,s,x,value\n", 0), 0u);
  const auto p = unroll(u, 4.0);
  EXPECT_NEAR(p.x.back(), 2 * std::numbers::pi + 4.0, 1e-12);
  const auto svg = profile_svg(u, "a<b");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
}

TEST(Report, ConfigJsonRoundTrip) {
  SolverConfig c;
  c.tol = 3e-7;
  c.grid = {0.02, 77.0};
  c.seed = 42;
  const auto d = solver_config_from_json(to_json(c));
  EXPECT_EQ(d.tol, c.tol);
  EXPECT_EQ(d.grid.trunc_L, 77.0);
  EXPECT_EQ(d.seed, 42u);
}
