#pragma once

#include <cmath>

// Closed-form integrals over one interval of length h on which the function
// is linear, running from value a to value b.
namespace qgraph::p1 {

inline double int_pow_nonneg(double a, double b, int p, double h) {
  // h * sum_{j=0}^{p} a^j b^{p-j} / (p+1); valid for any signs when p is even
  double s = 0.0;
  double aj = 1.0;
  for (int j = 0; j <= p; ++j) {
    s += aj * std::pow(b, p - j);
    aj *= a;
  }
  return h * s / (p + 1);
}

/// Integral of |u|^p.
inline double int_abs_pow(double a, double b, int p, double h) {
  if (p % 2 == 0) return int_pow_nonneg(a, b, p, h);
  if ((a >= 0.0 && b >= 0.0) || (a <= 0.0 && b <= 0.0)) return int_pow_nonneg(std::abs(a), std::abs(b), p, h);
  const double t0 = a / (a - b);  // zero crossing, fraction of the interval
  return t0 * h * std::pow(std::abs(a), p) / (p + 1) + (1.0 - t0) * h * std::pow(std::abs(b), p) / (p + 1);
}

inline double int_sq(double a, double b, double h) { return h * (a * a + a * b + b * b) / 3.0; }

inline double int_sixth(double a, double b, double h) {
  const double a2 = a * a, b2 = b * b;
  const double a3 = a2 * a, b3 = b2 * b;
  return h * (a3 * a3 + a3 * a2 * b + a2 * a2 * b2 + a3 * b3 + a2 * b2 * b2 + a * b3 * b2 + b3 * b3) / 7.0;
}

inline double int_deriv_sq(double a, double b, double h) {
  const double d = b - a;
  return d * d / h;
}

/// Partial derivative of int_sixth with respect to the left value a;
/// swap the arguments for the right value.
inline double d_int_sixth_da(double a, double b, double h) {
  const double a2 = a * a, b2 = b * b;
  const double a4 = a2 * a2, b4 = b2 * b2;
  return h * (6.0 * a4 * a + 5.0 * a4 * b + 4.0 * a2 * a * b2 + 3.0 * a2 * b2 * b + 2.0 * a * b4 + b4 * b) / 7.0;
}

}  // namespace qgraph::p1
