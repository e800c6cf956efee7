#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "qgraph/p1.hpp"
#include "qgraph/summation.hpp"
#include "qgraph/topology.hpp"

namespace qgraph {

/// Critical masses and best Gagliardo-Nirenberg constants of the line and
/// the half-line.
struct Constants {
  static constexpr double mu_R = std::numbers::pi * std::numbers::sqrt3 / 2.0;
  static constexpr double mu_R_plus = std::numbers::pi * std::numbers::sqrt3 / 4.0;
  static constexpr double K_R = 3.0 / (mu_R * mu_R);
  static constexpr double K_R_plus = 3.0 / (mu_R_plus * mu_R_plus);
};

/// sech(y)^(1/2), written with exponentials of -|y| so it never overflows.
inline double sqrt_sech(double y) {
  const double t = std::exp(-std::abs(y));
  return std::sqrt(2.0 * t / (1.0 + t * t));
}

/// Soliton phi_lambda(x) = sqrt(lambda) sech^(1/2)(2 lambda x / sqrt 3).
inline double soliton(double lambda, double x) {
  if (!(lambda > 0.0)) throw std::invalid_argument("soliton: lambda must be positive");
  return std::sqrt(lambda) * sqrt_sech(2.0 * lambda * x / std::numbers::sqrt3);
}

/// Energy of the piecewise-linear interpolant of phi_lambda on [-L, L] with
/// step h (nodes at multiples of h). Vanishes as h -> 0, L -> infinity; a
/// short window misses the tails, whose kinetic part dominates.
inline double soliton_energy_defect(double lambda, double L, double h) {
  if (!(lambda > 0.0) || !(L > 0.0) || !(h > 0.0)) throw std::invalid_argument("soliton_energy_defect: bad arguments");
  const auto n = static_cast<std::size_t>(std::llround(2.0 * L / h));
  const double step = 2.0 * L / static_cast<double>(n);
  const double e = pairwise_sum(0, n, [&](std::size_t k) {
    const double a = soliton(lambda, -L + step * static_cast<double>(k));
    const double b = soliton(lambda, -L + step * static_cast<double>(k + 1));
    return 0.5 * p1::int_deriv_sq(a, b, step) - p1::int_sixth(a, b, step) / 6.0;
  });
  return e;
}

/// Topology-implied critical mass: exact in cases (a)-(c), bracketed in (d).
struct CriticalMass {
  std::optional<double> exact;
  double lower = Constants::mu_R_plus;
  double upper = Constants::mu_R;

  std::optional<double> exact_gn_constant() const {
    if (!exact) return std::nullopt;
    return 3.0 / (*exact * *exact);
  }
};

inline CriticalMass critical_mass_exact(const TopologyClass& tc) {
  CriticalMass cm;
  switch (tc.tag) {
    case TopologyTag::Tip:
    case TopologyTag::OneHalfLineNoTip:
      cm.exact = Constants::mu_R_plus;
      cm.lower = cm.upper = Constants::mu_R_plus;
      break;
    case TopologyTag::CycleCovered:
      cm.exact = Constants::mu_R;
      cm.lower = cm.upper = Constants::mu_R;
      break;
    case TopologyTag::Other:
      break;
  }
  return cm;
}

}  // namespace qgraph
