#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgraph {

inline constexpr std::size_t kInfinity = std::numeric_limits<std::size_t>::max();
inline constexpr double kInfiniteLength = std::numeric_limits<double>::infinity();

/// Raised for malformed graph descriptions. `line` is 1-based when the error
/// can be anchored to a line of a graph file, 0 otherwise.
class GraphError : public std::runtime_error {
 public:
  GraphError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// An edge of a metric graph. A half-line has `to == kInfinity` and infinite
/// length; its coordinate runs from 0 at `from` towards the infinity point.
/// A finite edge is parametrised by [0, length] from `from` to `to`.
struct Edge {
  std::string id;
  std::size_t from = 0;
  std::size_t to = 0;
  double length = 0.0;

  bool is_half_line() const { return to == kInfinity; }
  bool is_loop() const { return !is_half_line() && from == to; }
};

/// Connected noncompact metric graph: vertices, finite edges and half-lines.
/// Immutable once built; construction validates every structural invariant.
class MetricGraph {
 public:
  MetricGraph() = default;

  MetricGraph(std::string name, std::vector<std::string> vertices, std::vector<Edge> edges)
      : name_(std::move(name)), vertices_(std::move(vertices)), edges_(std::move(edges)) {
    validate();
  }

  const std::string& name() const { return name_; }
  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }

  std::optional<std::size_t> find_vertex(const std::string& id) const {
    for (std::size_t v = 0; v < vertices_.size(); ++v)
      if (vertices_[v] == id) return v;
    return std::nullopt;
  }

  std::optional<std::size_t> find_edge(const std::string& id) const {
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (edges_[e].id == id) return e;
    return std::nullopt;
  }

  /// Combinatorial degree; a self-loop counts twice, infinity points never count.
  std::size_t degree(std::size_t v) const {
    std::size_t d = 0;
    for (const auto& e : edges_) {
      if (e.from == v) ++d;
      if (e.to == v) ++d;
    }
    return d;
  }

  std::vector<std::size_t> half_lines() const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (edges_[e].is_half_line()) out.push_back(e);
    return out;
  }

  std::size_t half_line_count() const { return half_lines().size(); }

  /// Sum of the finite edge lengths.
  double compact_length() const {
    double s = 0.0;
    for (const auto& e : edges_)
      if (!e.is_half_line()) s += e.length;
    return s;
  }

  /// Kind of validation failure, used by the parser to anchor messages.
  enum class Subject { Vertex, Edge, Graph };
  struct Violation {
    std::string message;
    Subject subject;
    std::size_t index;
  };

  static std::optional<Violation> check(const std::vector<std::string>& vertices,
                                        const std::vector<Edge>& edges) {
    using S = Subject;
    for (std::size_t v = 0; v < vertices.size(); ++v)
      for (std::size_t w = 0; w < v; ++w)
        if (vertices[v] == vertices[w])
          return Violation{"duplicate vertex id '" + vertices[v] + "'", S::Vertex, v};
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Edge& ed = edges[e];
      for (std::size_t f = 0; f < e; ++f)
        if (edges[f].id == ed.id) return Violation{"duplicate edge id '" + ed.id + "'", S::Edge, e};
      if (ed.from >= vertices.size())
        return Violation{"edge '" + ed.id + "' starts at an unknown vertex", S::Edge, e};
      if (ed.is_half_line()) {
        if (!std::isinf(ed.length) || ed.length < 0)
          return Violation{"half-line '" + ed.id + "' must have length INF", S::Edge, e};
      } else {
        if (ed.to >= vertices.size())
          return Violation{"edge '" + ed.id + "' ends at an unknown vertex", S::Edge, e};
        if (!std::isfinite(ed.length) || !(ed.length > 0.0))
          return Violation{"finite edge '" + ed.id + "' needs a positive finite length", S::Edge, e};
      }
    }
    if (vertices.empty()) return Violation{"graph has no vertices", S::Graph, 0};
    bool any_half_line = false;
    for (const auto& ed : edges) any_half_line = any_half_line || ed.is_half_line();
    if (!any_half_line) return Violation{"graph is compact: at least one half-line is required", S::Graph, 0};

    std::vector<std::size_t> deg(vertices.size(), 0);
    for (const auto& ed : edges) {
      ++deg[ed.from];
      if (!ed.is_half_line()) ++deg[ed.to];
    }
    for (std::size_t v = 0; v < vertices.size(); ++v)
      if (deg[v] == 0) return Violation{"vertex '" + vertices[v] + "' is isolated", S::Vertex, v};

    // Connectivity over finite edges; half-lines do not join vertices.
    std::vector<std::size_t> parent(vertices.size());
    for (std::size_t v = 0; v < parent.size(); ++v) parent[v] = v;
    auto find = [&](std::size_t v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (const auto& ed : edges)
      if (!ed.is_half_line()) parent[find(ed.from)] = find(ed.to);
    for (std::size_t v = 1; v < vertices.size(); ++v)
      if (find(v) != find(0))
        return Violation{"graph is disconnected: vertex '" + vertices[v] + "' is not reachable from '" +
                             vertices[0] + "'",
                         S::Vertex, v};
    return std::nullopt;
  }

 private:
  void validate() const {
    if (auto bad = check(vertices_, edges_)) throw GraphError(bad->message);
  }

  std::string name_;
  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
};

/// Parses the line-oriented graph description format:
///
///     # comment
///     graph <name>
///     vertex <id> [<id> ...]
///     edge <id> <from> <to|INF> <length|INF>
///
/// Every violation of the MetricGraph invariants is reported with the line
/// that introduced the offending vertex or edge.
inline MetricGraph parse_graph(std::istream& in) {
  std::string name = "unnamed";
  std::size_t name_line = 0;
  std::vector<std::string> vertices;
  std::vector<std::size_t> vertex_lines;
  struct PendingEdge {
    std::string id, from, to, length;
    std::size_t line;
  };
  std::vector<PendingEdge> pending;

  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "graph") {
      if (name_line) throw GraphError("second 'graph' declaration (first on line " + std::to_string(name_line) + ")", lineno);
      if (!(ls >> name)) throw GraphError("'graph' needs a name", lineno);
      name_line = lineno;
    } else if (key == "vertex") {
      std::string id;
      std::size_t n = 0;
      while (ls >> id) {
        if (id == "INF") throw GraphError("'INF' is reserved for infinity points", lineno);
        vertices.push_back(id);
        vertex_lines.push_back(lineno);
        ++n;
      }
      if (n == 0) throw GraphError("'vertex' needs at least one id", lineno);
    } else if (key == "edge") {
      PendingEdge pe;
      pe.line = lineno;
      if (!(ls >> pe.id >> pe.from >> pe.to >> pe.length))
        throw GraphError("expected 'edge <id> <from> <to|INF> <length|INF>'", lineno);
      std::string extra;
      if (ls >> extra) throw GraphError("unexpected token '" + extra + "'", lineno);
      pending.push_back(std::move(pe));
    } else {
      throw GraphError("unknown keyword '" + key + "'", lineno);
    }
  }

  auto vertex_index = [&](const std::string& id, std::size_t line) -> std::size_t {
    for (std::size_t v = 0; v < vertices.size(); ++v)
      if (vertices[v] == id) return v;
    throw GraphError("unknown vertex '" + id + "'", line);
  };

  std::vector<Edge> edges;
  for (const auto& pe : pending) {
    Edge ed;
    ed.id = pe.id;
    if (pe.from == "INF") throw GraphError("edge '" + pe.id + "' must start at a vertex", pe.line);
    ed.from = vertex_index(pe.from, pe.line);
    const bool inf_to = pe.to == "INF";
    const bool inf_len = pe.length == "INF";
    if (inf_to != inf_len)
      throw GraphError("edge '" + pe.id + "': a half-line has to=INF and length=INF together", pe.line);
    if (inf_to) {
      ed.to = kInfinity;
      ed.length = kInfiniteLength;
    } else {
      ed.to = vertex_index(pe.to, pe.line);
      std::size_t used = 0;
      try {
        ed.length = std::stod(pe.length, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != pe.length.size()) throw GraphError("bad length '" + pe.length + "'", pe.line);
    }
    edges.push_back(std::move(ed));
  }

  if (auto bad = MetricGraph::check(vertices, edges)) {
    std::size_t line = name_line;
    if (bad->subject == MetricGraph::Subject::Vertex) line = vertex_lines.at(bad->index);
    if (bad->subject == MetricGraph::Subject::Edge) line = pending.at(bad->index).line;
    throw GraphError(bad->message, line);
  }
  return MetricGraph(name, std::move(vertices), std::move(edges));
}

inline MetricGraph parse_graph(const std::string& text) {
  std::istringstream in(text);
  return parse_graph(in);
}

inline MetricGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open graph file '" + path + "'");
  try {
    return parse_graph(in);
  } catch (const GraphError& e) {
    throw GraphError(path + ": " + e.what());
  }
}

inline std::string to_text(const MetricGraph& g) {
  std::ostringstream out;
  out.precision(17);
  out << "graph " << g.name() << "\n";
  for (const auto& v : g.vertices()) out << "vertex " << v << "\n";
  for (const auto& e : g.edges()) {
    out << "edge " << e.id << " " << g.vertices()[e.from] << " ";
    if (e.is_half_line())
      out << "INF INF\n";
    else
      out << g.vertices()[e.to] << " " << e.length << "\n";
  }
  return out.str();
}

}  // namespace qgraph
