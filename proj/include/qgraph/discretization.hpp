#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qgraph/graph.hpp"

namespace qgraph {

/// Target mesh step and the finite computational length of every half-line.
struct GridSpec {
  double step_h = 1e-2;
  double trunc_L = 40.0;

  void validate() const {
    if (!(step_h > 0.0) || !std::isfinite(step_h)) throw std::invalid_argument("grid step must be positive");
    if (!(trunc_L >= 10.0) || !std::isfinite(trunc_L))
      throw std::invalid_argument("half-line truncation length must be at least 10");
  }
};

inline constexpr std::size_t kNoDof = static_cast<std::size_t>(-1);

/// Uniform P1 mesh on every edge. Unknowns are the vertex values (indices
/// 0..V-1, shared by all incident edges) followed by the interior nodes of
/// each edge. The far end of a truncated half-line is pinned to zero and
/// carries no unknown.
class Discretization {
 public:
  struct EdgeGrid {
    std::size_t cells = 0;
    double h = 0.0;
    double length = 0.0;  ///< computational length (trunc_L for half-lines)
    std::size_t offset = 0;  ///< unknown index of interior node 1
    std::size_t from = 0;
    std::size_t to = kNoDof;  ///< kNoDof for a half-line
  };

  Discretization(MetricGraph graph, GridSpec spec) : graph_(std::move(graph)), spec_(spec) {
    spec_.validate();
    std::size_t next = graph_.vertex_count();
    for (const auto& e : graph_.edges()) {
      EdgeGrid eg;
      eg.length = e.is_half_line() ? spec_.trunc_L : e.length;
      eg.cells = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(eg.length / spec_.step_h - 1e-9)));
      eg.h = eg.length / static_cast<double>(eg.cells);
      eg.offset = next;
      eg.from = e.from;
      eg.to = e.is_half_line() ? kNoDof : e.to;
      next += eg.cells - 1;
      grids_.push_back(eg);
    }
    dof_count_ = next;
    lumped_.assign(dof_count_, 0.0);
    for (std::size_t e = 0; e < grids_.size(); ++e) {
      const auto& eg = grids_[e];
      for (std::size_t k = 0; k < eg.cells; ++k) {
        for (std::size_t end : {k, k + 1}) {
          const std::size_t d = node_dof(e, end);
          if (d != kNoDof) lumped_[d] += 0.5 * eg.h;
        }
      }
    }
  }

  /// Builds with explicit per-edge cell counts (used by transforms that must
  /// keep a node-to-node correspondence with another mesh).
  Discretization(MetricGraph graph, GridSpec spec, const std::vector<std::size_t>& cells,
                 const std::vector<double>& lengths)
      : graph_(std::move(graph)), spec_(spec) {
    std::size_t next = graph_.vertex_count();
    for (std::size_t i = 0; i < graph_.edge_count(); ++i) {
      const auto& e = graph_.edge(i);
      EdgeGrid eg;
      eg.length = lengths.at(i);
      eg.cells = cells.at(i);
      if (eg.cells < 2) throw std::invalid_argument("every edge needs at least two cells");
      eg.h = eg.length / static_cast<double>(eg.cells);
      eg.offset = next;
      eg.from = e.from;
      eg.to = e.is_half_line() ? kNoDof : e.to;
      next += eg.cells - 1;
      grids_.push_back(eg);
    }
    dof_count_ = next;
    lumped_.assign(dof_count_, 0.0);
    for (std::size_t e = 0; e < grids_.size(); ++e)
      for (std::size_t k = 0; k < grids_[e].cells; ++k)
        for (std::size_t end : {k, k + 1})
          if (const std::size_t d = node_dof(e, end); d != kNoDof) lumped_[d] += 0.5 * grids_[e].h;
  }

  const MetricGraph& graph() const { return graph_; }
  const GridSpec& spec() const { return spec_; }
  std::size_t dof_count() const { return dof_count_; }
  std::size_t edge_count() const { return grids_.size(); }
  const EdgeGrid& edge_grid(std::size_t e) const { return grids_.at(e); }
  const std::vector<double>& lumped_mass() const { return lumped_; }

  /// Unknown index of node k (0..cells) on edge e, or kNoDof for a pinned end.
  std::size_t node_dof(std::size_t e, std::size_t k) const {
    const auto& eg = grids_[e];
    if (k == 0) return eg.from;
    if (k == eg.cells) return eg.to;
    return eg.offset + k - 1;
  }

  double node_position(std::size_t e, std::size_t k) const { return static_cast<double>(k) * grids_[e].h; }

  bool is_vertex_dof(std::size_t d) const { return d < graph_.vertex_count(); }

  /// Smallest mesh step over all edges.
  double min_step() const {
    double h = kInfiniteLength;
    for (const auto& eg : grids_) h = std::min(h, eg.h);
    return h;
  }

  std::size_t cell_count() const {
    std::size_t n = 0;
    for (const auto& eg : grids_) n += eg.cells;
    return n;
  }

 private:
  MetricGraph graph_;
  GridSpec spec_;
  std::vector<EdgeGrid> grids_;
  std::size_t dof_count_ = 0;
  std::vector<double> lumped_;
};

using DiscretizationPtr = std::shared_ptr<const Discretization>;

inline DiscretizationPtr discretize(const MetricGraph& g, GridSpec spec) {
  return std::make_shared<const Discretization>(g, spec);
}

/// Piecewise-linear function on a discretized graph. Vertex values are stored
/// once, so continuity at vertices holds by construction.
class GraphFunction {
 public:
  GraphFunction() = default;
  explicit GraphFunction(DiscretizationPtr disc) : disc_(std::move(disc)), dofs_(disc_->dof_count(), 0.0) {}
  GraphFunction(DiscretizationPtr disc, std::vector<double> dofs) : disc_(std::move(disc)), dofs_(std::move(dofs)) {
    if (dofs_.size() != disc_->dof_count()) throw std::invalid_argument("GraphFunction: wrong number of values");
    for (double v : dofs_)
      if (!std::isfinite(v)) throw std::invalid_argument("GraphFunction: non-finite sample");
  }

  /// Samples f(edge, x) at every node; x is the arclength from the edge's
  /// `from` vertex. Vertex values are taken from their first incident edge end.
  static GraphFunction sample(DiscretizationPtr disc, const std::function<double(std::size_t, double)>& f) {
    const auto& d = *disc;
    std::vector<double> v(d.dof_count(), 0.0);
    std::vector<bool> set(d.dof_count(), false);
    for (std::size_t e = 0; e < d.edge_count(); ++e) {
      const auto& eg = d.edge_grid(e);
      for (std::size_t k = 0; k <= eg.cells; ++k) {
        const std::size_t dof = d.node_dof(e, k);
        if (dof == kNoDof || set[dof]) continue;
        v[dof] = f(e, d.node_position(e, k));
        set[dof] = true;
      }
    }
    return GraphFunction(std::move(disc), std::move(v));
  }

  const DiscretizationPtr& discretization() const { return disc_; }
  const Discretization& disc() const { return *disc_; }
  const MetricGraph& graph() const { return disc_->graph(); }
  std::span<const double> dofs() const { return dofs_; }
  std::vector<double>&& release() && { return std::move(dofs_); }

  double node(std::size_t e, std::size_t k) const {
    const std::size_t d = disc_->node_dof(e, k);
    return d == kNoDof ? 0.0 : dofs_[d];
  }

  double vertex_value(std::size_t v) const { return dofs_.at(v); }

  /// P1 evaluation at arclength x on edge e; zero beyond a truncated end.
  double value_at(std::size_t e, double x) const {
    const auto& eg = disc_->edge_grid(e);
    if (x <= 0.0) return node(e, 0);
    if (x >= eg.length) return node(e, eg.cells);
    const double s = x / eg.h;
    const std::size_t k = std::min(static_cast<std::size_t>(s), eg.cells - 1);
    const double t = s - static_cast<double>(k);
    return (1.0 - t) * node(e, k) + t * node(e, k + 1);
  }

  GraphFunction scaled(double c) const {
    std::vector<double> v(dofs_);
    for (double& x : v) x *= c;
    return GraphFunction(disc_, std::move(v));
  }

  GraphFunction abs() const {
    std::vector<double> v(dofs_);
    for (double& x : v) x = std::abs(x);
    return GraphFunction(disc_, std::move(v));
  }

 private:
  DiscretizationPtr disc_;
  std::vector<double> dofs_;
};

/// Metric distance from the point at arclength x0 on edge e0 to every node.
/// Half-lines are traversed only up to their truncation length.
inline std::vector<double> distance_field(const Discretization& d, std::size_t e0, double x0) {
  const auto& g = d.graph();
  const std::size_t nv = g.vertex_count();
  std::vector<double> vd(nv, kInfiniteLength);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const auto& eg0 = d.edge_grid(e0);
  auto relax = [&](std::size_t v, double dist) {
    if (dist < vd[v]) {
      vd[v] = dist;
      pq.push({dist, v});
    }
  };
  relax(eg0.from, x0);
  if (eg0.to != kNoDof) relax(eg0.to, eg0.length - x0);
  while (!pq.empty()) {
    auto [dist, v] = pq.top();
    pq.pop();
    if (dist > vd[v]) continue;
    for (std::size_t e = 0; e < d.edge_count(); ++e) {
      const auto& eg = d.edge_grid(e);
      if (eg.to == kNoDof) continue;
      if (eg.from == v) relax(eg.to, dist + eg.length);
      if (eg.to == v) relax(eg.from, dist + eg.length);
    }
  }
  std::vector<double> out(d.dof_count(), kInfiniteLength);
  for (std::size_t e = 0; e < d.edge_count(); ++e) {
    const auto& eg = d.edge_grid(e);
    for (std::size_t k = 0; k <= eg.cells; ++k) {
      const std::size_t dof = d.node_dof(e, k);
      if (dof == kNoDof) continue;
      const double x = d.node_position(e, k);
      double best = vd[eg.from] + x;
      if (eg.to != kNoDof) best = std::min(best, vd[eg.to] + (eg.length - x));
      if (e == e0) best = std::min(best, std::abs(x - x0));
      out[dof] = std::min(out[dof], best);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: per-edge node arrays (including both ends) plus grid
// metadata. Doubles are written with round-trip precision.

inline nlohmann::json to_json(const GraphFunction& u) {
  const auto& d = u.disc();
  nlohmann::json j;
  j["format"] = "qgraph-function/1";
  j["graph"] = d.graph().name();
  j["grid"] = {{"step_h", d.spec().step_h}, {"trunc_L", d.spec().trunc_L}};
  nlohmann::json verts = nlohmann::json::object();
  for (std::size_t v = 0; v < d.graph().vertex_count(); ++v) verts[d.graph().vertices()[v]] = u.vertex_value(v);
  j["vertices"] = verts;
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t e = 0; e < d.edge_count(); ++e) {
    const auto& eg = d.edge_grid(e);
    std::vector<double> vals(eg.cells + 1);
    for (std::size_t k = 0; k <= eg.cells; ++k) vals[k] = u.node(e, k);
    edges.push_back({{"id", d.graph().edge(e).id}, {"cells", eg.cells}, {"length", eg.length}, {"values", vals}});
  }
  j["edges"] = edges;
  return j;
}

/// Rebuilds a function on `disc`; the stored mesh must match it exactly.
inline GraphFunction function_from_json(const nlohmann::json& j, DiscretizationPtr disc) {
  if (j.value("format", "") != "qgraph-function/1") throw std::invalid_argument("not a qgraph-function/1 document");
  const auto& d = *disc;
  std::vector<double> v(d.dof_count(), 0.0);
  for (const auto& [name, val] : j.at("vertices").items()) {
    auto idx = d.graph().find_vertex(name);
    if (!idx) throw std::invalid_argument("function file names unknown vertex '" + name + "'");
    v[*idx] = val.get<double>();
  }
  for (const auto& je : j.at("edges")) {
    const std::string id = je.at("id");
    auto e = d.graph().find_edge(id);
    if (!e) throw std::invalid_argument("function file names unknown edge '" + id + "'");
    const auto& eg = d.edge_grid(*e);
    const auto vals = je.at("values").get<std::vector<double>>();
    if (je.at("cells").get<std::size_t>() != eg.cells || vals.size() != eg.cells + 1)
      throw std::invalid_argument("edge '" + id + "': mesh does not match the requested grid");
    for (std::size_t k = 1; k < eg.cells; ++k) v[d.node_dof(*e, k)] = vals[k];
    if (eg.to == kNoDof && vals.back() != 0.0)
      throw std::invalid_argument("edge '" + id + "': truncated half-line must end at zero");
  }
  return GraphFunction(std::move(disc), std::move(v));
}

/// Rebuilds the exact mesh recorded in a function document on graph `g`.
inline DiscretizationPtr discretization_from_json(const nlohmann::json& j, const MetricGraph& g) {
  std::vector<std::size_t> cells(g.edge_count(), 0);
  std::vector<double> lengths(g.edge_count(), 0.0);
  for (const auto& je : j.at("edges")) {
    const std::string id = je.at("id");
    auto e = g.find_edge(id);
    if (!e) throw std::invalid_argument("function file names unknown edge '" + id + "'");
    cells[*e] = je.at("cells").get<std::size_t>();
    lengths[*e] = je.at("length").get<double>();
  }
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    if (cells[e] == 0) throw std::invalid_argument("function file lacks edge '" + g.edge(e).id + "'");
  GridSpec spec;
  spec.step_h = j.at("grid").at("step_h").get<double>();
  spec.trunc_L = j.at("grid").at("trunc_L").get<double>();
  return std::make_shared<const Discretization>(g, spec, cells, lengths);
}

/// Grid stored in a function document, for rebuilding its discretization.
inline GridSpec grid_from_json(const nlohmann::json& j) {
  GridSpec s;
  s.step_h = j.at("grid").at("step_h").get<double>();
  s.trunc_L = j.at("grid").at("trunc_L").get<double>();
  return s;
}

}  // namespace qgraph
