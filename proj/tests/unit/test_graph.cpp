#include <gtest/gtest.h>

#include "common.hpp"

using namespace qgraph;

namespace {

std::size_t error_line(const std::string& text) {
  try {
    parse_graph(text);
  } catch (const GraphError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(GraphParse, Tadpole) {
  const auto g = fixture("tadpole");
  EXPECT_EQ(g.name(), "tadpole");
  ASSERT_EQ(g.vertex_count(), 1u);
  ASSERT_EQ(g.edge_count(), 2u);
  EXPECT_TRUE(g.edge(0).is_loop());
  EXPECT_TRUE(g.edge(1).is_half_line());
  EXPECT_EQ(g.degree(0), 3u);
  EXPECT_DOUBLE_EQ(g.compact_length(), 6.283185307179586);
}

TEST(GraphParse, CommentsAndMultiVertexLines) {
  const auto g = parse_graph("# x\ngraph t  # trailing\nvertex a b\n\nedge e a b 2.5\nedge h b INF INF\n");
  EXPECT_EQ(g.vertex_count(), 2u);
  EXPECT_EQ(g.half_line_count(), 1u);
  EXPECT_EQ(*g.find_edge("e"), 0u);
  EXPECT_FALSE(g.find_vertex("zz"));
}

TEST(GraphParse, ErrorsCarryLine) {
  EXPECT_EQ(error_line("graph a\nvertex v\nedge h v INF INF\nbogus\n"), 4u);
  EXPECT_EQ(error_line("vertex v\nedge h v INF 3\n"), 2u);
  EXPECT_EQ(error_line("vertex v\nedge h v INF INF\nedge h v INF INF\n"), 3u);
  EXPECT_EQ(error_line("vertex v\nvertex v\nedge h v INF INF\n"), 2u);
  EXPECT_EQ(error_line("vertex v\nedge h v INF INF\nedge e v w 1\n"), 3u);
  EXPECT_EQ(error_line("vertex v w\nedge h v INF INF\nedge e v w -1\n"), 3u);
  EXPECT_EQ(error_line("vertex v w\nedge h v INF INF\nedge e v w 1x\n"), 3u);
  EXPECT_EQ(error_line("vertex v w\nedge h v INF INF\n"), 1u);  // isolated w
  EXPECT_EQ(error_line("vertex INF\n"), 1u);
  EXPECT_EQ(error_line("graph a\ngraph b\n"), 2u);
}

TEST(GraphParse, CompactAndDisconnectedRejected) {
  EXPECT_THROW(parse_graph("vertex a b\nedge e a b 1\n"), GraphError);
  EXPECT_THROW(parse_graph("vertex a b\nedge h a INF INF\nedge k b INF INF\n"), GraphError);
  EXPECT_THROW(parse_graph(""), GraphError);
  EXPECT_THROW(load_graph("/nonexistent/x.graph"), GraphError);
}

TEST(GraphParse, TextRoundTrip) {
  for (const char* name : {"fig1_tip", "fig2_cycle_covered", "fig3_one_half_line", "signpost", "tadpole"}) {
    const auto g = fixture(name);
    const auto h = parse_graph(to_text(g));
    ASSERT_EQ(h.edge_count(), g.edge_count()) << name;
    EXPECT_EQ(h.vertices(), g.vertices());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      EXPECT_EQ(h.edge(e).id, g.edge(e).id);
      EXPECT_EQ(h.edge(e).from, g.edge(e).from);
      EXPECT_EQ(h.edge(e).to, g.edge(e).to);
      EXPECT_EQ(h.edge(e).length, g.edge(e).length);
    }
  }
}

TEST(GraphBuild, ConstructorValidates) {
  EXPECT_THROW(MetricGraph("x", {"a"}, {Edge{"e", 0, 0, 1.0}}), GraphError);
  EXPECT_NO_THROW(MetricGraph("x", {"a"}, {Edge{"h", 0, kInfinity, kInfiniteLength}}));
}
