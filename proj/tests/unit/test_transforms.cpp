#include <gtest/gtest.h>

#include <random>

#include "common.hpp"

using namespace qgraph;

namespace {

GraphFunction bump(const DiscretizationPtr& disc, const std::string& edge, double x0, double lambda, double mu) {
  const auto e = *disc->graph().find_edge(edge);
  auto u = GraphFunction::sample(disc, [&](std::size_t f, double x) { return f == e ? soliton(lambda, x - x0) : 0.0; });
  return with_mass(u, mu);
}

}  // namespace

TEST(Rearrange, DecreasingInputIsFixed) {
  const auto r = rearrange_pieces({{3.0, 2.0, 1.0}, {2.0, 0.0, 2.0}});
  ASSERT_EQ(r.x.size(), 3u);
  EXPECT_DOUBLE_EQ(r.x[1], 1.0);
  EXPECT_DOUBLE_EQ(r.x[2], 3.0);
  EXPECT_DOUBLE_EQ(r.y[0], 3.0);
  EXPECT_DOUBLE_EQ(r.y[1], 2.0);
  EXPECT_DOUBLE_EQ(r.y[2], 0.0);
}

TEST(Rearrange, TentBecomesOneRamp) {
  // |u'|^2 drops from 2 to 1/2; every L^p norm stays
  const std::vector<LinearPiece> tent{{0.0, 1.0, 1.0}, {1.0, 0.0, 1.0}};
  const auto r = rearrange_pieces(tent);
  EXPECT_DOUBLE_EQ(r.length(), 2.0);
  EXPECT_NEAR(r.kinetic(), 0.5, 1e-15);
  EXPECT_NEAR(r.lp_norm_p(2), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.lp_norm_p(6), 2.0 / 7.0, 1e-15);
  EXPECT_NEAR(r.value_at(0.5), 0.75, 1e-15);
}

TEST(Rearrange, FlatPieceGivesPlateau) {
  const auto r = rearrange_pieces({{0.0, 2.0, 1.0}, {2.0, 2.0, 1.5}});
  EXPECT_DOUBLE_EQ(r.length(), 2.5);
  EXPECT_NEAR(r.value_at(1.0), 2.0, 1e-15);
  EXPECT_NEAR(r.value_at(2.0), 1.0, 1e-15);
  EXPECT_NEAR(r.kinetic(), 4.0, 1e-14);
}

TEST(Rearrange, NegativeValuesRejected) {
  EXPECT_THROW(rearrange_pieces({{-1.0, 0.0, 1.0}}), std::invalid_argument);
}

TEST(Rearrange, EquimeasurableOnGraph) {
  auto disc = discretize(fixture("fig2_cycle_covered"), {0.05, 20.0});
  std::mt19937_64 rng(5);
  const auto u = random_bump_field(disc, rng, true);
  const auto r = decreasing_rearrangement(u);
  for (int p : {2, 6}) EXPECT_NEAR(r.lp_norm_p(p), lp_norm_p(u, p), 1e-12 * lp_norm_p(u, p)) << p;
  EXPECT_LE(r.kinetic(), kinetic(u) * (1 + 1e-12));
  for (std::size_t k = 0; k + 1 < r.profile.y.size(); ++k) EXPECT_GE(r.profile.y[k], r.profile.y[k + 1]);
  EXPECT_NEAR(r.cell_lp_norm_p(6), cell_model_lp(u, 6), 1e-12 * cell_model_lp(u, 6));
}

TEST(Rearrange, SymmetricOnLine) {
  auto disc = discretize(fixture("line"), {1e-2, 30.0});
  const auto u = GraphFunction::sample(disc, [](std::size_t, double x) { return soliton(1.0, x); });
  const auto s = symmetric_rearrangement(u);
  EXPECT_NEAR(s.mass(), mass(u), 1e-10);
  EXPECT_NEAR(s.profile.value_at(-1.3), s.profile.value_at(1.3), 1e-12);
  EXPECT_NEAR(s.profile.x.front(), -s.profile.x.back(), 1e-12);
  // already symmetric-decreasing: kinetic barely moves
  EXPECT_NEAR(s.kinetic(), kinetic(u), 1e-3 * kinetic(u));
}

TEST(BridgeDouble, LineUnchanged) {
  auto disc = discretize(fixture("line"), {0.1, 20.0});
  const auto u = bump(disc, "left", 2.0, 1.0, 1.0);
  const auto b = bridge_double(u);
  EXPECT_TRUE(b.bridges.empty());
  EXPECT_EQ(b.graph.edge_count(), 2u);
  EXPECT_EQ(std::vector<double>(b.u.dofs().begin(), b.u.dofs().end()), std::vector<double>(u.dofs().begin(), u.dofs().end()));
}

TEST(BridgeDouble, NormIdentities) {
  // two copies of doubled length: each L^p integral over B counts four times,
  // the kinetic one once
  auto disc = discretize(fixture("signpost"), {0.05, 20.0});
  std::mt19937_64 rng(9);
  const auto u = random_bump_field(disc, rng, false);
  const auto b = bridge_double(u);
  const auto stem = *u.graph().find_edge("stem");
  ASSERT_EQ(b.bridges, std::vector<std::size_t>{stem});
  ASSERT_TRUE(b.graph.find_edge("stem.1"));
  ASSERT_TRUE(b.graph.find_edge("stem.2"));
  EXPECT_DOUBLE_EQ(b.graph.edge(*b.graph.find_edge("stem.2")).length, 2.0);
  EXPECT_NEAR(mass(b.u), mass(u) + 3 * edge_mass(u, stem), 1e-12);
  EXPECT_NEAR(lp_norm_p(b.u, 6), lp_norm_p(u, 6) + 3 * edge_lp(u, stem, 6), 1e-10);
  EXPECT_NEAR(kinetic(b.u), kinetic(u), 1e-10);
  const auto bound = bridge_doubling_bound_check(u);
  EXPECT_NEAR(bound.lhs, lp_norm_p(b.u, 6), 1e-10);
  EXPECT_NEAR(bound.mu + 3 * bound.mu_bridges, mass(b.u), 1e-12);
  EXPECT_EQ(classify(b.graph).tag, TopologyTag::CycleCovered);
}

TEST(Tail, ExponentialProfile) {
  std::vector<double> s(201);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::exp(-2.0 * k / 200.0);
  const auto t = tail_regularize(s, 1.0);
  EXPECT_FALSE(t.zero_extension);
  EXPECT_GE(t.x0, 0.5);
  EXPECT_LT(t.x0, 1.0);
  EXPECT_DOUBLE_EQ(t.v0, t.psi0);
  // the exponential tail carries exactly theta
  EXPECT_NEAR(t.tail_mass, t.theta, 1e-15);
  EXPECT_NEAR(t.mass_v, t.mass_psi - t.theta, 1e-12);
  EXPECT_LE(t.C_iii, t.C_iii_bound);
  EXPECT_LE(t.C_iv, t.C_iv_bound);
  EXPECT_NEAR(t.v(t.x0), t.psi_x0, 1e-15);
  EXPECT_NEAR(t.v(t.x0 + 1.0), t.psi_x0 * std::exp(-t.lambda), 1e-15);
}

TEST(Tail, ZeroBranches) {
  const auto z = tail_regularize(std::vector<double>(11, 0.0), 2.0);
  EXPECT_TRUE(z.zero_extension);
  EXPECT_DOUBLE_EQ(z.theta, 0.0);
  EXPECT_DOUBLE_EQ(z.v(0.3), 0.0);
  // support inside [0, ell/2): the tail is already zero
  std::vector<double> s(21, 0.0);
  for (std::size_t k = 0; k < 8; ++k) s[k] = 1.0 - k / 8.0;
  const auto t = tail_regularize(s, 1.0);
  EXPECT_TRUE(t.zero_extension);
  EXPECT_DOUBLE_EQ(t.mass_v, t.mass_psi);
  EXPECT_DOUBLE_EQ(t.kinetic_v, t.kinetic_psi);
  EXPECT_THROW(tail_regularize(std::vector<double>{0.0, 1.0, 0.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(tail_regularize(std::vector<double>{1.0, 0.5}, 1.0), std::invalid_argument);
}

TEST(ModifiedGN, LineSoliton) {
  auto disc = discretize(fixture("line"), {1e-2, 30.0});
  const double mu = 0.9 * Constants::mu_R;
  const auto u = bump(disc, "right", 4.0, 1.5, mu);
  const auto r = modified_gn_check(u, mu, 1e-3);
  EXPECT_DOUBLE_EQ(r.ell, 1.0);
  EXPECT_NEAR(r.mu, mu, 1e-12);
  EXPECT_GE(r.theta, 0.0);
  EXPECT_LE(r.measured_C, r.C_graph);
  EXPECT_NEAR(r.w_mass, mu - r.theta, 1e-8);
  EXPECT_LE(r.psi_kinetic, kinetic(u) * (1 + 1e-9));
  EXPECT_THROW(modified_gn_check(u, mu + 0.1, 1e-3), std::invalid_argument);
}

TEST(ModifiedGN, Rejections) {
  auto tip = discretize(fixture("half_line"), {1e-2, 20.0});
  EXPECT_THROW(modified_gn_check(bump(tip, "h", 3.0, 1.0, 1.0)), std::invalid_argument);
  auto line = discretize(fixture("line"), {1e-2, 20.0});
  EXPECT_THROW(modified_gn_check(bump(line, "left", 3.0, 1.0, 3.0)), std::invalid_argument);  // above mu_R
  // the stem of the signpost is a bridge: any path out of a maximum there cuts the graph
  auto sp = discretize(fixture("signpost"), {1e-2, 20.0});
  EXPECT_THROW(modified_gn_check(bump(sp, "stem", 0.5, 2.0, 2.0)), UnsupportedInput);
  EXPECT_DOUBLE_EQ(modified_gn_ell(fixture("tadpole")), std::numbers::pi);
}
