#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <random>

#include "common.hpp"

using namespace qgraph;
using boost::math::quadrature::gauss_kronrod;

namespace {

double quad_linear_pow(double a, double b, double h, int p) {
  auto f = [&](double x) {
    const double v = a + (b - a) * x / h;
    return std::pow(std::abs(v), p);
  };
  // split at the sign change so the integrand is smooth on each part
  if (a * b < 0.0) {
    const double z = h * a / (a - b);
    return gauss_kronrod<double, 31>::integrate(f, 0.0, z) + gauss_kronrod<double, 31>::integrate(f, z, h);
  }
  return gauss_kronrod<double, 31>::integrate(f, 0.0, h);
}

}  // namespace

TEST(P1, CellIntegralsAgainstQuadrature) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double a = U(rng), b = U(rng), h = 0.1 + std::abs(U(rng));
    EXPECT_NEAR(p1::int_sq(a, b, h), quad_linear_pow(a, b, h, 2), 1e-12);
    EXPECT_NEAR(p1::int_sixth(a, b, h), quad_linear_pow(a, b, h, 6), 1e-11);
    for (int p : {1, 3, 5, 6})
      EXPECT_NEAR(p1::int_abs_pow(a, b, p, h), quad_linear_pow(a, b, h, p), 1e-11) << p;
    EXPECT_NEAR(p1::int_deriv_sq(a, b, h), (b - a) * (b - a) / h, 1e-14);
  }
}

TEST(P1, SexticDerivativeFiniteDifference) {
  const double a = 0.7, b = -1.3, h = 0.4, eps = 1e-6;
  const double fd = (p1::int_sixth(a + eps, b, h) - p1::int_sixth(a - eps, b, h)) / (2 * eps);
  EXPECT_NEAR(p1::d_int_sixth_da(a, b, h), fd, 1e-7);
}

TEST(Reference, SolitonMassIsLambdaFree) {
  boost::math::quadrature::exp_sinh<double> q;
  for (double lambda : {0.5, 1.0, 3.0}) {
    const double half = q.integrate([&](double x) { return std::pow(soliton(lambda, x), 2); });
    EXPECT_NEAR(2 * half, Constants::mu_R, 1e-10) << lambda;
  }
  EXPECT_THROW(soliton(0.0, 1.0), std::invalid_argument);
}

TEST(Reference, SolitonEnergyDefectShrinks) {
  const double coarse = std::abs(soliton_energy_defect(1.0, 40.0, 4e-2));
  const double fine = std::abs(soliton_energy_defect(1.0, 40.0, 1e-2));
  EXPECT_LT(fine, 1e-5);
  EXPECT_LT(fine, coarse);
}

TEST(Functionals, SolitonOnLine) {
  const auto g = fixture("line");
  auto disc = discretize(g, {1e-2, 40.0});
  const auto u = GraphFunction::sample(disc, [](std::size_t, double x) { return soliton(1.0, x); });
  const double m = mass(u);
  EXPECT_NEAR(m, Constants::mu_R, 1e-4);
  // |u'|^2 = |u|_6^6 / 3 for the soliton, so both energy parts agree
  const auto e = energy(u);
  EXPECT_NEAR(e.kinetic, e.potential, 1e-3);
  EXPECT_NEAR(e.total, 0.0, 1e-4);
  // tail decay exp(-x/sqrt3) fixes omega = 1/3
  EXPECT_NEAR(omega_estimate(u), 1.0 / 3.0, 1e-3);
}

TEST(Functionals, EnergyGradientFiniteDifference) {
  const auto g = fixture("signpost");
  auto disc = discretize(g, {0.1, 10.0});
  std::mt19937_64 rng(3);
  const auto u = random_bump_field(disc, rng, true);
  const auto dir = random_bump_field(disc, rng, true);
  const auto grad = qgraph::detail::energy_weak_gradient(*disc, u.dofs());
  const double eps = 1e-6;
  std::vector<double> up(u.dofs().begin(), u.dofs().end()), um = up;
  for (std::size_t i = 0; i < up.size(); ++i) {
    up[i] += eps * dir.dofs()[i];
    um[i] -= eps * dir.dofs()[i];
  }
  const double fd = (energy_total(*disc, up) - energy_total(*disc, um)) / (2 * eps);
  const double an = qgraph::detail::dot(grad, dir.dofs());
  EXPECT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(fd)));
}

TEST(Functionals, VertexValuesShared) {
  const auto g = fixture("tadpole");
  auto disc = discretize(g, {0.5, 10.0});
  const auto u = GraphFunction::sample(disc, [](std::size_t e, double x) { return e == 0 ? 1.0 + x : 1.0; });
  EXPECT_DOUBLE_EQ(u.node(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(u.node(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(u.node(0, disc->edge_grid(0).cells), 1.0);  // loop end is the same vertex
  EXPECT_DOUBLE_EQ(u.node(1, disc->edge_grid(1).cells), 0.0);  // truncated end pinned
}

TEST(Functionals, ScalingSubhomogeneity) {
  const auto g = fixture("line");
  auto disc = discretize(g, {1e-2, 40.0});
  const auto u = GraphFunction::sample(disc, [](std::size_t, double x) { return soliton(2.0, x); });
  const auto v = with_mass(u, 1.0);
  EXPECT_NEAR(mass(v), 1.0, 1e-12);
  const auto w = GraphFunction::sample(disc, [](std::size_t, double x) { return 1.5 * soliton(2.0, x); });
  const auto [scaled, linear] = scaling_subhomogeneity_check(w, 1.3 * mass(w));
  EXPECT_LT(scaled, linear);
}

TEST(Functionals, ConcentrateKeepsMass) {
  const auto g = fixture("half_line");
  auto disc = discretize(g, {1e-2, 40.0});
  const auto u = GraphFunction::sample(disc, [](std::size_t, double x) { return std::exp(-x); });
  const auto c = concentrate(u, 4.0, 0);
  EXPECT_NEAR(mass(c), mass(u), 1e-3 * mass(u));
  // kinetic scales with lambda^2
  EXPECT_NEAR(kinetic(c) / kinetic(u), 16.0, 0.2);
  const auto gl = fixture("line");
  auto dl = discretize(gl, {1e-1, 20.0});
  const auto both = GraphFunction::sample(dl, [](std::size_t, double x) { return std::exp(-x); });
  EXPECT_THROW(concentrate(both, 2.0, 0), SupportError);
}
