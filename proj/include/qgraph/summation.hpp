#pragma once

#include <cstddef>
#include <span>

namespace qgraph {

/// Pairwise (cascade) summation of term(i) for i in [first, first + count).
/// The recursion split is fixed, so the result depends only on the inputs and
/// never on scheduling.
template <class Term>
double pairwise_sum(std::size_t first, std::size_t count, const Term& term) {
  constexpr std::size_t kLeaf = 64;
  if (count <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = first; i < first + count; ++i) s += term(i);
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(first, half, term) + pairwise_sum(first + half, count - half, term);
}

inline double pairwise_sum(std::span<const double> values) {
  return pairwise_sum(0, values.size(), [&](std::size_t i) { return values[i]; });
}

}  // namespace qgraph
