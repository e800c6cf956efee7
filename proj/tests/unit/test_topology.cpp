#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "common.hpp"

using namespace qgraph;

namespace {

std::set<std::string> bridge_ids(const MetricGraph& g) {
  std::set<std::string> s;
  for (auto e : bridge_set(g)) s.insert(g.edge(e).id);
  return s;
}

}  // namespace

// Bridges worked out by hand from the drawings in fixtures/.
TEST(Topology, BridgesByHand) {
  EXPECT_EQ(bridge_ids(fixture("line")), std::set<std::string>{});
  EXPECT_EQ(bridge_ids(fixture("half_line")), std::set<std::string>{"h"});
  EXPECT_EQ(bridge_ids(fixture("tadpole")), std::set<std::string>{"h"});
  EXPECT_EQ(bridge_ids(fixture("signpost")), std::set<std::string>{"stem"});
  EXPECT_EQ(bridge_ids(fixture("fig1_tip")), std::set<std::string>{"pendant"});
  EXPECT_EQ(bridge_ids(fixture("fig2_cycle_covered")), std::set<std::string>{});
  EXPECT_EQ(bridge_ids(fixture("fig3_one_half_line")), std::set<std::string>{"h1"});
}

TEST(Topology, ParallelEdgesAreNotBridges) {
  const auto g = parse_graph("vertex a b\nedge h a INF INF\nedge p b a 1\nedge q a b 2\n");
  EXPECT_EQ(bridge_ids(g), (std::set<std::string>{"h"}));
}

TEST(Topology, Classification) {
  EXPECT_EQ(classify(fixture("fig1_tip")).tag, TopologyTag::Tip);
  EXPECT_EQ(classify(fixture("half_line")).tag, TopologyTag::Tip);
  EXPECT_EQ(classify(fixture("line")).tag, TopologyTag::CycleCovered);
  EXPECT_EQ(classify(fixture("fig2_cycle_covered")).tag, TopologyTag::CycleCovered);
  EXPECT_EQ(classify(fixture("tadpole")).tag, TopologyTag::OneHalfLineNoTip);
  EXPECT_EQ(classify(fixture("fig3_one_half_line")).tag, TopologyTag::OneHalfLineNoTip);
  EXPECT_EQ(classify(fixture("signpost")).tag, TopologyTag::Other);
}

TEST(Topology, TerminalPoints) {
  const auto g = fixture("fig1_tip");
  const auto t = terminal_points(g);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(g.vertices()[t[0]], "tip");
  EXPECT_EQ(terminal_points(fixture("half_line")).size(), 1u);
  EXPECT_TRUE(terminal_points(fixture("signpost")).empty());
}

TEST(Topology, CriticalMass) {
  EXPECT_DOUBLE_EQ(*critical_mass_exact(classify(fixture("line"))).exact, Constants::mu_R);
  EXPECT_DOUBLE_EQ(*critical_mass_exact(classify(fixture("tadpole"))).exact, Constants::mu_R_plus);
  const auto cm = critical_mass_exact(classify(fixture("signpost")));
  EXPECT_FALSE(cm.exact);
  EXPECT_DOUBLE_EQ(cm.lower, Constants::mu_R_plus);
  EXPECT_DOUBLE_EQ(cm.upper, Constants::mu_R);
}

TEST(Topology, ShortestLoop) {
  EXPECT_FALSE(shortest_loop_length(fixture("line")));
  EXPECT_NEAR(*shortest_loop_length(fixture("tadpole")), 2 * std::numbers::pi, 1e-15);
  EXPECT_DOUBLE_EQ(*shortest_loop_length(fixture("signpost")), 1.0);
  // Triangles in the meshed core; fig2 has a unit self-loop.
  EXPECT_DOUBLE_EQ(*shortest_loop_length(fixture("fig3_one_half_line")), 3.0);
  EXPECT_DOUBLE_EQ(*shortest_loop_length(fixture("fig2_cycle_covered")), 1.0);
}
