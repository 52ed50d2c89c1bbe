#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "isac_thz/pattern.hpp"

using namespace isac_thz;

namespace {
const double theta128 = two_pi / 128;
const PatternRequirement default_req{78.1, kmh_to_mps(70.0), 5000};
}  // namespace

TEST(Objective, FrozenValue) {
  EXPECT_NEAR(objective(0.5, 1, 5, SystemParams{}, theta128) / 0.13766536494336365, 1.0, 1e-13);
}

TEST(Objective, BalancedTermsMinimizeAtHalf) {
  SystemParams sys;
  // Choose tau so that U f_scs tau = V f_c T_sym A_theta with U = V = 1.
  sys.tau = sys.f_c * sys.t_sym * a_theta(theta128) / sys.f_scs;
  const double h = 1e-5;
  const double d = objective(0.5 + h, 1, 1, sys, theta128) - objective(0.5 - h, 1, 1, sys, theta128);
  EXPECT_NEAR(d / (2 * h) / objective(0.5, 1, 1, sys, theta128), 0.0, 1e-8);
}

TEST(Objective, ConvexMidpoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> a(0.01, 0.99);
  std::uniform_int_distribution<int> uv(1, 8);
  SystemParams sys;
  for (int i = 0; i < 100; ++i) {
    const double x = a(rng), y = a(rng);
    const int U = uv(rng), V = uv(rng);
    const double mid = objective(0.5 * (x + y), U, V, sys, theta128);
    EXPECT_LE(mid, 0.5 * (objective(x, U, V, sys, theta128) + objective(y, U, V, sys, theta128)) * (1 + 1e-14));
  }
}

TEST(OptimalPattern, DefaultRequirement) {
  SystemParams sys;
  const auto s = optimal_split(default_req, sys, theta128);
  EXPECT_EQ(s.U, 1);
  EXPECT_EQ(s.V, 5);
  EXPECT_NEAR(s.alpha, 0.3144144606993554, 1e-13);
  EXPECT_FALSE(s.clamped);
}

TEST(OptimalPattern, ExactFloorBoundary) {
  SystemParams sys;
  PatternRequirement req = default_req;
  req.d_max_req = speed_of_light / (4.0 * sys.f_scs);
  EXPECT_EQ(optimal_split(req, sys, theta128).U, 2);
}

TEST(OptimalPattern, InfeasibleRequirements) {
  SystemParams sys;
  PatternRequirement fast = default_req;
  fast.v_max_req = 1.01 * speed_of_light / (2.0 * sys.f_c * sys.t_sym);
  EXPECT_THROW(optimal_split(fast, sys, theta128), infeasible_error);
  PatternRequirement far = default_req;
  far.d_max_req = 100.0;
  EXPECT_THROW(optimal_split(far, sys, theta128), infeasible_error);
}

TEST(OptimalPattern, ClampsOutOfRangeSplit) {
  SystemParams sys;
  PatternRequirement req = default_req;
  req.n_rs = 2;
  const auto s = optimal_split(req, sys, theta128);
  EXPECT_TRUE(s.clamped);
  EXPECT_GE(s.alpha, alpha_lo);
  EXPECT_LE(s.alpha, alpha_hi);
}

TEST(OptimalPattern, Stationary) {
  SystemParams sys;
  const auto s = optimal_split(default_req, sys, theta128);
  const double h = 1e-6;
  const double d = (objective(s.alpha + h, s.U, s.V, sys, theta128) - objective(s.alpha - h, s.U, s.V, sys, theta128)) /
                   (2 * h);
  EXPECT_LT(std::abs(d) / objective(s.alpha, s.U, s.V, sys, theta128), 1e-6);
}

TEST(OptimalPattern, WiderBeamsAndHigherCarrierShiftTowardBandwidth) {
  SystemParams sys;
  double prev = 1.0;
  for (int n_b : {512, 256, 128, 64, 32, 16}) {  // A_theta grows as beams widen
    const double a = optimal_split(default_req, sys, two_pi / n_b).alpha_unclamped;
    EXPECT_LT(a, prev);
    prev = a;
  }
  // Carrier range and requirement chosen so the floors stay at U = 2, V = 1;
  // across a floor step V f_c is nearly invariant and the split barely moves.
  const PatternRequirement req{39.0, 17.5, 5000};
  prev = 1.0;
  for (double f : {1.0e12, 1.2e12, 1.4e12, 1.6e12, 1.8e12}) {
    sys.f_c = f;
    const auto s = optimal_split(req, sys, theta128);
    ASSERT_EQ(s.U, 2);
    ASSERT_EQ(s.V, 1);
    EXPECT_LT(s.alpha_unclamped, prev);
    prev = s.alpha_unclamped;
  }
}

TEST(OptimalPattern, BeatsRandomFeasibleTriples) {
  SystemParams sys;
  const auto s = optimal_split(default_req, sys, theta128);
  const double best = objective(s.alpha, s.U, s.V, sys, theta128);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(0.01, 0.99);
  std::uniform_int_distribution<int> u(1, s.U), v(1, s.V);
  for (int i = 0; i < 1000; ++i) EXPECT_GE(objective(a(rng), u(rng), v(rng), sys, theta128), best);
}

TEST(BruteForce, AgreesOnDefaults) {
  SystemParams sys;
  const auto p = optimal_pattern(default_req, sys, theta128);
  const auto b = brute_force_pattern(default_req, sys, theta128, 10000);
  EXPECT_EQ(b.U, p.U);
  EXPECT_EQ(b.V, p.V);
  EXPECT_NEAR(b.alpha, p.alpha, 1e-3);
  EXPECT_GE(objective(b.alpha, b.U, b.V, sys, theta128), objective(p.alpha, p.U, p.V, sys, theta128) * (1 - 1e-12));
}

TEST(BruteForce, RejectsTinyGrid) {
  EXPECT_THROW(brute_force_pattern(default_req, SystemParams{}, theta128, 10), domain_error);
}
