#include <gtest/gtest.h>

#include <random>

#include "fcsp/diffusion.hpp"
#include "fcsp/error.hpp"
#include "fcsp/scenario.hpp"
#include "oracle.hpp"

using namespace fcsp;

namespace {

DiffusionParams two_period(double dd2) {
  DiffusionParams p;
  p.periods = 2;
  OdDiffusion od;
  od.a = {0.05, 0.07};
  od.K = 1.0;
  od.theta0 = 0.1;
  od.sigma = {0.02, 0.03};
  od.delta_d = {{2, dd2}, {3, 0.0}};
  od.delta_upsilon = {{}, {{2, 0.1}}};
  p.ods.push_back(od);
  return p;
}

}  // namespace

TEST(Diffusion, ConvenienceLevel) {
  const auto p = two_period(0.4);
  EXPECT_DOUBLE_EQ(convenience_level(p.ods[0], {}), 1.0);
  EXPECT_DOUBLE_EQ(convenience_level(p.ods[0], {2, 3}), 1.4);
}

TEST(Diffusion, ExactRecursionMatchesIndependentImplementation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    DiffusionParams p;
    p.periods = 3;
    OdDiffusion od;
    od.a = {0.02 + 0.1 * u(rng), 0.02 + 0.1 * u(rng), 0.02 + 0.1 * u(rng)};
    od.theta0 = 0.15 * u(rng) + 0.01;
    od.sigma = {0.01, 0.01, 0.01};
    od.delta_d = {{1, u(rng)}, {2, u(rng)}};
    od.delta_upsilon.resize(3);
    p.ods.push_back(od);
    FcsHistory h(4);
    for (int g = 1; g <= 3; ++g)
      for (NodeId n : {1, 2})
        if (u(rng) < 0.5 || h[g - 1].count(n)) h[g].insert(n);
    const auto got = exact_adoption_recursion(p, h);
    const auto want = oracle::logistic_adoption(od, h);
    ASSERT_EQ(got[0].size(), want.size());
    for (size_t g = 0; g < want.size(); ++g) EXPECT_NEAR(got[0][g], want[g], 1e-12);
  }
}

TEST(Diffusion, LinearCoefficientsByHand) {
  const auto p = two_period(0.4);
  const auto c = adoption_coefficients(p);
  // damp_g = theta0 * prod_{q<=g} a_q / K, mu_g = theta0 + sum_{r<=g} (a_r - damp_g).
  const double damp1 = 0.1 * 0.05, damp2 = 0.1 * 0.05 * 0.07;
  EXPECT_NEAR(c.at(0, 1).mu_bar, 0.1 + 0.05 - damp1, 1e-15);
  EXPECT_NEAR(c.at(0, 2).mu_bar, 0.1 + (0.05 - damp2) + (0.07 - damp2), 1e-15);
  EXPECT_TRUE(c.at(0, 1).expected.terms.empty());
  ASSERT_EQ(c.at(0, 2).expected.terms.size(), 1u);  // zero factor at node 3 dropped
  EXPECT_EQ(c.at(0, 2).expected.terms[0].node, 2);
  EXPECT_EQ(c.at(0, 2).expected.terms[0].period, 1);
  EXPECT_NEAR(c.at(0, 2).expected.terms[0].coef, (0.07 - damp2) * 0.4, 1e-15);
}

TEST(Diffusion, NoStationsGivesIntercepts) {
  const auto p = two_period(0.4);
  const auto c = adoption_coefficients(p);
  const FcsHistory none(3);
  for (int g = 1; g <= 2; ++g) EXPECT_DOUBLE_EQ(expected_adoption(c, p, 0, g, none), c.at(0, g).mu_bar);
}

TEST(Diffusion, EarlierOpeningNotWorse) {
  DiffusionParams p = two_period(0.4);
  p.periods = 3;
  p.ods[0].a.push_back(0.08);
  p.ods[0].sigma.push_back(0.03);
  p.ods[0].delta_upsilon.emplace_back();
  const auto c = adoption_coefficients(p);
  FcsHistory early(4), late(4);
  early[1] = early[2] = early[3] = {2};
  late[2] = late[3] = {2};
  for (int g = 1; g <= 3; ++g)
    EXPECT_GE(expected_adoption(c, p, 0, g, early), expected_adoption(c, p, 0, g, late) - 1e-15);
  EXPECT_GT(expected_adoption(c, p, 0, 3, early), expected_adoption(c, p, 0, 3, late));
}

TEST(Diffusion, ZeroIncentivePathIgnoresPlan) {
  const auto p = two_period(0.0);
  const auto c = adoption_coefficients(p);
  FcsHistory a(3), b(3);
  a[1] = {2, 3};
  EXPECT_DOUBLE_EQ(expected_adoption(c, p, 0, 2, a), expected_adoption(c, p, 0, 2, b));
}

TEST(Diffusion, InvalidParameters) {
  auto p = two_period(0.4);
  p.ods[0].K = 0.0;
  EXPECT_THROW(adoption_coefficients(p), Error);
  p = two_period(0.4);
  p.ods[0].a.pop_back();
  EXPECT_THROW(adoption_coefficients(p), Error);
}

TEST(Ambiguity, RowsAndViolation) {
  const auto p = two_period(0.4);
  const auto c = adoption_coefficients(p);
  AmbiguityParams amb;
  amb.radii = {{{0.01, 0.9, 1.1}, {0.02, 0.9, 1.1}}};
  ScenarioSupport sup;
  sup.od_keys = {"1-4"};
  sup.periods = {{{0.1}, {0.15}, {0.2}}, {{0.15}, {0.25}, {0.35}}};
  const auto rows = ambiguity_constraint_rows(c, p, amb, sup);
  ASSERT_EQ(rows.size(), 2u);
  FcsHistory h(3);
  h[1] = {2};
  const double mu2 = expected_adoption(c, p, 0, 2, h);
  EXPECT_NEAR(rows[1].rows[0].mean_lo.eval(h), mu2 - 0.02, 1e-14);
  EXPECT_NEAR(rows[1].rows[0].mean_hi.eval(h), mu2 + 0.02, 1e-14);
  // Second-moment interval brackets mean^2 + sigma^2 scaled by the multipliers.
  const double base2 = c.at(0, 2).mu_bar * c.at(0, 2).mu_bar + 0.03 * 0.03;
  const FcsHistory none(3);
  EXPECT_NEAR(rows[1].rows[0].second_lo.eval(none), 0.9 * base2, 1e-14);
  EXPECT_NEAR(rows[1].rows[0].second_hi.eval(none), 1.1 * base2, 1e-14);
  EXPECT_GT(rows[1].rows[0].second_hi.eval(h), rows[1].rows[0].second_hi.eval(none));
  // A point mass far from the mean violates the first-moment rows.
  EXPECT_GT(ddas_violation(rows[0], none, {1.0, 0.0, 0.0}), 0.0);
  EXPECT_THROW(ddas_violation(rows[0], none, {1.0}), Error);
}
