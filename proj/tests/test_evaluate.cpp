#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "fcsp/error.hpp"
#include "fcsp/evaluate.hpp"
#include "oracle.hpp"

using namespace fcsp;

namespace {

TestSet point_mass(const Instance& inst, size_t s) {
  TestSet t;
  for (int g = 1; g <= inst.periods; ++g) {
    std::vector<double> p(inst.support.at(g).size(), 0.0);
    p.at(s) = 1.0;
    t.probabilities.push_back(p);
  }
  return t;
}

struct Toy {
  LoadedConfig cfg = oracle::fixture("toy/config.json");
  SolveReport ddu = solve_extensive(cfg.instance, PlanningMode::DDU, cfg.solve);
};

const Toy& toy() {
  static const Toy t;
  return t;
}

}  // namespace

TEST(TestSetTest, ParseKinds) {
  EXPECT_EQ(parse_test_kind("wcd"), TestKind::WCD);
  EXPECT_EQ(parse_test_kind("rgd"), TestKind::RGD);
  EXPECT_EQ(parse_test_kind("ed"), TestKind::ED);
  EXPECT_THROW(parse_test_kind("xyz"), Error);
}

TEST(TestSetTest, ValidateRejectsBadVectors) {
  const Instance& inst = toy().cfg.instance;
  TestSet t = point_mass(inst, 0);
  EXPECT_NO_THROW(t.validate(inst));
  t.probabilities[0][0] = 0.5;
  EXPECT_THROW(t.validate(inst), Error);
  t = point_mass(inst, 0);
  t.probabilities.pop_back();
  EXPECT_THROW(t.validate(inst), Error);
}

TEST(Simulate, NoAdoptionMeansFullCoverageAndNoShedding) {
  Instance inst = toy().cfg.instance;
  for (auto& g : inst.support.periods)
    for (auto& s : g) std::fill(s.begin(), s.end(), 0.0);
  auto be = make_backend();
  const auto rep = simulate_plan(*be, inst, toy().ddu.plan, point_mass(inst, 0));
  EXPECT_DOUBLE_EQ(rep.covered_fraction, 1.0);
  for (double s : rep.shedding_kwh_per_day) EXPECT_NEAR(s, 0.0, 1e-9);
  for (const auto& g : rep.hours)
    for (const auto& d : g)
      for (const HourStat& h : d) EXPECT_NEAR(h.demand, 0.0, 1e-12);
}

TEST(Simulate, NoStationsMeansNothingCovered) {
  const Instance& inst = toy().cfg.instance;
  Plan p = empty_plan(inst);
  for (auto& pp : p.periods)
    for (size_t c = 0; c < inst.candidates.size(); ++c) pp.sub_mw[c] = inst.coupling.initial_substation(inst.candidates[c]);
  auto be = make_backend();
  EXPECT_THROW(simulate_plan(*be, inst, p, point_mass(inst, 1)), Error);
  SimulateOptions opt;
  opt.allow_stranded = true;
  const auto rep = simulate_plan(*be, inst, p, point_mass(inst, 1), opt);
  EXPECT_NEAR(rep.covered_fraction, 0.0, 1e-12);
  for (const auto& g : rep.hours)
    for (const auto& d : g)
      for (const HourStat& h : d) {
        EXPECT_NEAR(h.covered, 0.0, 1e-9);
        EXPECT_GT(h.demand, 0.0);
      }
}

TEST(Simulate, ExpectationIsProbabilityWeightedSum) {
  const Instance& inst = toy().cfg.instance;
  const Plan& plan = toy().ddu.plan;
  auto be = make_backend();
  TestSet t;
  for (int g = 1; g <= inst.periods; ++g) {
    std::vector<double> p(inst.support.at(g).size(), 0.0);
    p[0] = 0.3;
    p[1] = 0.7;
    t.probabilities.push_back(p);
  }
  const auto rep = simulate_plan(*be, inst, plan, t);
  const auto a = simulate_plan(*be, inst, plan, point_mass(inst, 0));
  const auto b = simulate_plan(*be, inst, plan, point_mass(inst, 1));
  const double scale = inst.options.cost_scale;
  for (int g = 1; g <= inst.periods; ++g) {
    const double v0 = solve_subproblem(*be, inst, plan, g, inst.support.at(g)[0]).value / scale;
    const double v1 = solve_subproblem(*be, inst, plan, g, inst.support.at(g)[1]).value / scale;
    EXPECT_NEAR(rep.operation_cost[g - 1], 0.3 * v0 + 0.7 * v1, 1e-6 * v1);
    EXPECT_NEAR(rep.shedding_kwh_per_day[g - 1],
                0.3 * a.shedding_kwh_per_day[g - 1] + 0.7 * b.shedding_kwh_per_day[g - 1], 1e-6);
    for (size_t d = 0; d < rep.hours[g - 1].size(); ++d)
      for (int h = 0; h < 24; ++h) {
        const HourStat& m = rep.hours[g - 1][d][h];
        EXPECT_NEAR(m.demand, 0.3 * a.hours[g - 1][d][h].demand + 0.7 * b.hours[g - 1][d][h].demand, 1e-9);
        EXPECT_GE(m.covered_fraction, 0.0);
        EXPECT_LE(m.covered_fraction, 1.0);
      }
  }
}

TEST(Simulate, WorstCaseMatchesReportedObjective) {
  const Instance& inst = toy().cfg.instance;
  const SolveReport& r = toy().ddu;
  auto be = make_backend();
  const TestSet w = worst_case_test_set(*be, inst, r.plan);
  const auto rep = simulate_plan(*be, inst, r.plan, w);
  EXPECT_LE(rep.total_operation_cost, r.operation_cost * (1 + 1e-6));
  EXPECT_NEAR(rep.total_operation_cost, r.operation_cost, 1e-6 * r.operation_cost);
}

TEST(Simulate, WorstCaseDominatesRandomDraws) {
  const Instance& inst = toy().cfg.instance;
  const Plan& plan = toy().ddu.plan;
  auto be = make_backend();
  const double wcd = simulate_plan(*be, inst, plan, worst_case_test_set(*be, inst, plan)).total_operation_cost;
  const auto ddas = inst.ddas();
  const FcsHistory h = plan.history(inst);
  const auto draws = random_test_sets(*be, inst, plan, 20, 42);
  ASSERT_EQ(draws.size(), 20u);
  for (const TestSet& t : draws) {
    for (int g = 1; g <= inst.periods; ++g) EXPECT_LE(ddas_violation(ddas[g - 1], h, t.probabilities[g - 1]), 1e-7);
    EXPECT_LE(simulate_plan(*be, inst, plan, t).total_operation_cost, wcd * (1 + 1e-7));
  }
}

TEST(Simulate, RandomDrawsAreReproducible) {
  const Instance& inst = toy().cfg.instance;
  auto be = make_backend();
  const auto a = random_test_sets(*be, inst, toy().ddu.plan, 5, 7);
  const auto b = random_test_sets(*be, inst, toy().ddu.plan, 5, 7);
  for (size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].probabilities, b[k].probabilities);
}

TEST(Empirical, MatchesMomentsWhenReachable) {
  Instance inst = toy().cfg.instance;
  const Plan& plan = toy().ddu.plan;
  const FcsHistory h = plan.history(inst);
  // Support points around the target mean so both moments are reachable.
  for (int g = 1; g <= inst.periods; ++g) {
    const double mu = expected_adoption(inst.coeffs, inst.diffusion, 0, g, h);
    inst.support.periods[g - 1] = {{mu - 0.05}, {mu}, {mu + 0.05}};
  }
  const TestSet t = empirical_test_set(inst, plan);
  EXPECT_NO_THROW(t.validate(inst));
  for (int g = 1; g <= inst.periods; ++g) {
    const auto& sup = inst.support.at(g);
    const auto& p = t.probabilities[g - 1];
    double m1 = 0, m2 = 0;
    for (size_t s = 0; s < sup.size(); ++s) {
      m1 += p[s] * sup[s][0];
      m2 += p[s] * sup[s][0] * sup[s][0];
    }
    const double mu = expected_adoption(inst.coeffs, inst.diffusion, 0, g, h);
    const double sigma = inst.diffusion.ods[0].sigma[g - 1];
    // With three support points the moment system has a unique solution;
    // when it is a proper distribution the fit must reproduce it.
    ASSERT_EQ(sup.size(), 3u);
    const double a = sup[0][0], b = sup[1][0], c = sup[2][0];
    const double m2t = mu * mu + sigma * sigma;
    // Solve [1 1 1; a b c; a2 b2 c2] q = [1; mu; m2t] by Cramer's rule.
    auto det3 = [](double a11, double a12, double a13, double a21, double a22, double a23, double a31, double a32,
                   double a33) {
      return a11 * (a22 * a33 - a23 * a32) - a12 * (a21 * a33 - a23 * a31) + a13 * (a21 * a32 - a22 * a31);
    };
    const double D = det3(1, 1, 1, a, b, c, a * a, b * b, c * c);
    const double q0 = det3(1, 1, 1, mu, b, c, m2t, b * b, c * c) / D;
    const double q1 = det3(1, 1, 1, a, mu, c, a * a, m2t, c * c) / D;
    const double q2 = det3(1, 1, 1, a, b, mu, a * a, b * b, m2t) / D;
    ASSERT_GT(std::min({q0, q1, q2}), 0.0);
    EXPECT_NEAR(m1, mu, 1e-6);
    EXPECT_NEAR(m2, m2t, 1e-6);
    EXPECT_NEAR(p[0], q0, 1e-5);
    EXPECT_NEAR(p[1], q1, 1e-5);
  }
}

TEST(Vd3rs, ZeroWithoutIncentives) {
  const auto cfg = oracle::fixture("toy/config_independent.json");
  const Vd3rsResult v = vd3rs(cfg.instance, cfg.solve);
  EXPECT_EQ(v.value, 0.0);
}

TEST(Vd3rs, NonNegativeAndPositiveWithIncentives) {
  const auto& t = toy();
  const Vd3rsResult v = vd3rs(t.cfg.instance, t.cfg.solve);
  EXPECT_GT(v.value, 0.0);
  EXPECT_GE(v.f_diu_plan, v.f_ddu);
  auto be = make_backend();
  EXPECT_NEAR(vd3rs_of_plans(*be, t.cfg.instance, v.ddu_plan, v.diu_plan), v.value, 1e-12);
}

TEST(Trajectory, InterceptsWithoutStations) {
  const Instance& inst = toy().cfg.instance;
  const auto tr = diffusion_trajectory(inst, empty_plan(inst));
  for (size_t od = 0; od < inst.ods.size(); ++od)
    for (int g = 1; g <= inst.periods; ++g) EXPECT_DOUBLE_EQ(tr[od][g - 1], inst.coeffs.at(od, g).mu_bar);
}

TEST(Ablation, DisablingDerNeverHelps) {
  const auto cfg = oracle::fixture("toy/config_der.json");
  const double full = solve_extensive(cfg.instance, PlanningMode::DDU, cfg.solve).objective;
  for (int variant = 0; variant < 2; ++variant) {
    Instance inst = cfg.instance;
    (variant == 0 ? inst.options.pv : inst.options.ess) = false;
    const double restricted = solve_extensive(inst, PlanningMode::DDU, cfg.solve).objective;
    EXPECT_GE(restricted, full * (1 - 1e-6));
  }
}
