#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "qgraph/discretization.hpp"

namespace qgraph {

/// Sum of a few Gaussian bumps in the graph distance, placed on random edges.
/// Half-line bumps sit within `reach` of the vertex so the tail is resolved.
/// With signed = true the amplitudes take both signs.
inline GraphFunction random_bump_field(const DiscretizationPtr& disc, std::mt19937_64& rng, bool signed_amp = false,
                                       double reach = 10.0) {
  const auto& d = *disc;
  std::uniform_int_distribution<std::size_t> pick_edge(0, d.edge_count() - 1);
  std::uniform_int_distribution<int> pick_count(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(d.dof_count(), 0.0);
  const int bumps = pick_count(rng);
  for (int b = 0; b < bumps; ++b) {
    const std::size_t e = pick_edge(rng);
    const auto& eg = d.edge_grid(e);
    const double span = eg.to == kNoDof ? std::min(reach, eg.length) : eg.length;
    const double x0 = span * unit(rng);
    const double width = 0.2 + 1.8 * unit(rng);
    double amp = 0.2 + 0.8 * unit(rng);
    if (signed_amp && unit(rng) < 0.5) amp = -amp;
    const auto dist = distance_field(d, e, x0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double r = dist[i] / width;
      if (r < 12.0) v[i] += amp * std::exp(-r * r);
    }
  }
  return GraphFunction(disc, std::move(v));
}

}  // namespace qgraph
