#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "qgraph/graph.hpp"

namespace qgraph {

/// Vertices of degree one. Infinity points are not points of the metric
/// graph, so a half-line contributes only its finite endpoint.
inline std::vector<std::size_t> terminal_points(const MetricGraph& g) {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    if (g.degree(v) == 1) out.push_back(v);
  return out;
}

/// Combinatorial multigraph in which every infinity point of a half-line is
/// merged into one extra vertex `omega`. Edge k corresponds to edge k of the
/// source graph; self-loops and parallel edges are kept.
struct Multigraph {
  struct Link {
    std::size_t a;
    std::size_t b;
  };
  std::size_t vertex_count = 0;
  std::size_t omega = kInfinity;  ///< index of the merged infinity vertex
  std::vector<Link> links;

  std::size_t degree(std::size_t v) const {
    std::size_t d = 0;
    for (const auto& l : links) d += (l.a == v) + (l.b == v);
    return d;
  }
};

inline Multigraph compactify(const MetricGraph& g) {
  Multigraph m;
  m.vertex_count = g.vertex_count() + 1;
  m.omega = g.vertex_count();
  for (const auto& e : g.edges()) m.links.push_back({e.from, e.is_half_line() ? m.omega : e.to});
  return m;
}

/// Bridges of a multigraph by one depth-first traversal with low-links.
/// The parent is skipped by edge id, so a parallel pair is never a bridge;
/// self-loops are ignored entirely.
inline std::vector<std::size_t> multigraph_bridges(const Multigraph& m) {
  const std::size_t n = m.vertex_count;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);  // (neighbour, link)
  for (std::size_t k = 0; k < m.links.size(); ++k) {
    const auto& l = m.links[k];
    if (l.a == l.b) continue;
    adj[l.a].push_back({l.b, k});
    adj[l.b].push_back({l.a, k});
  }
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> disc(n, kUnseen), low(n, 0);
  std::vector<std::size_t> bridges;
  std::size_t clock = 0;

  struct Frame {
    std::size_t v;
    std::size_t via;  // link used to enter v
    std::size_t next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] != kUnseen) continue;
    std::vector<Frame> stack{{root, kUnseen, 0}};
    disc[root] = low[root] = clock++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < adj[f.v].size()) {
        const auto [w, k] = adj[f.v][f.next++];
        if (k == f.via) continue;
        if (disc[w] == kUnseen) {
          disc[w] = low[w] = clock++;
          stack.push_back({w, k, 0});
        } else {
          low[f.v] = std::min(low[f.v], disc[w]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame& parent = stack.back();
          low[parent.v] = std::min(low[parent.v], low[done.v]);
          if (low[done.v] > disc[parent.v]) bridges.push_back(done.via);
        }
      }
    }
  }
  std::sort(bridges.begin(), bridges.end());
  return bridges;
}

/// Edges of `g` lying on no cycle, where cycles through infinity are allowed.
inline std::vector<std::size_t> bridge_set(const MetricGraph& g) { return multigraph_bridges(compactify(g)); }

inline bool has_cycle_covering(const MetricGraph& g) { return bridge_set(g).empty(); }

enum class TopologyTag { Tip, CycleCovered, OneHalfLineNoTip, Other };

inline const char* case_letter(TopologyTag t) {
  switch (t) {
    case TopologyTag::Tip: return "a";
    case TopologyTag::CycleCovered: return "b";
    case TopologyTag::OneHalfLineNoTip: return "c";
    case TopologyTag::Other: return "d";
  }
  return "?";
}

inline const char* to_string(TopologyTag t) {
  switch (t) {
    case TopologyTag::Tip: return "Tip";
    case TopologyTag::CycleCovered: return "CycleCovered";
    case TopologyTag::OneHalfLineNoTip: return "OneHalfLineNoTip";
    case TopologyTag::Other: return "Other";
  }
  return "?";
}

struct TopologyClass {
  TopologyTag tag = TopologyTag::Other;
  std::vector<std::size_t> terminal_points;
  std::vector<std::size_t> bridges;
  std::size_t half_line_count = 0;
};

inline TopologyClass classify(const MetricGraph& g) {
  TopologyClass tc;
  tc.terminal_points = terminal_points(g);
  tc.bridges = bridge_set(g);
  tc.half_line_count = g.half_line_count();
  if (!tc.terminal_points.empty())
    tc.tag = TopologyTag::Tip;
  else if (tc.bridges.empty())
    tc.tag = TopologyTag::CycleCovered;
  else if (tc.half_line_count == 1)
    tc.tag = TopologyTag::OneHalfLineNoTip;
  else
    tc.tag = TopologyTag::Other;
  return tc;
}

/// The graph with the interiors of all half-lines removed. It is compact, so
/// it is not a MetricGraph; `edges` refers to edge indices of the source.
struct CompactCore {
  std::vector<std::size_t> vertices;
  std::vector<std::size_t> edges;
  double total_length = 0.0;
};

inline CompactCore compact_core(const MetricGraph& g) {
  CompactCore core;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) core.vertices.push_back(v);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    if (g.edge(e).is_half_line()) continue;
    core.edges.push_back(e);
    core.total_length += g.edge(e).length;
  }
  return core;
}

/// Length of the shortest loop (homeomorphic image of a circle) in the
/// compact core, or nullopt when the core is a forest.
inline std::optional<double> shortest_loop_length(const MetricGraph& g) {
  std::optional<double> best;
  auto offer = [&](double len) {
    if (!best || len < *best) best = len;
  };
  const std::size_t n = g.vertex_count();
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (ed.is_half_line()) continue;
    if (ed.is_loop()) {
      offer(ed.length);
      continue;
    }
    // Shortest path from `from` to `to` that avoids edge e, closed by e.
    std::vector<double> dist(n, kInfiniteLength);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[ed.from] = 0.0;
    pq.push({0.0, ed.from});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > dist[v]) continue;
      for (std::size_t f = 0; f < g.edge_count(); ++f) {
        const Edge& fe = g.edge(f);
        if (f == e || fe.is_half_line() || fe.is_loop()) continue;
        std::size_t w;
        if (fe.from == v)
          w = fe.to;
        else if (fe.to == v)
          w = fe.from;
        else
          continue;
        if (d + fe.length < dist[w]) {
          dist[w] = d + fe.length;
          pq.push({dist[w], w});
        }
      }
    }
    if (std::isfinite(dist[ed.to])) offer(dist[ed.to] + ed.length);
  }
  return best;
}

}  // namespace qgraph
