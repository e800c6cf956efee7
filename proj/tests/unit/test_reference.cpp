#include <gtest/gtest.h>

#include <numbers>

#include "qgraph/qgraph.hpp"

using namespace qgraph;

TEST(Constants, CriticalMassesAndGNConstants) {
  constexpr double pi = std::numbers::pi;
  EXPECT_NEAR(Constants::mu_R, 2.7206990463513265, 1e-15);
  EXPECT_NEAR(Constants::mu_R_plus, Constants::mu_R / 2.0, 1e-15);
  EXPECT_NEAR(Constants::K_R, 4.0 / (pi * pi), 1e-15);
  EXPECT_NEAR(Constants::K_R_plus, 16.0 / (pi * pi), 1e-14);
}
