#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "fcsp/error.hpp"
#include "fcsp/solve.hpp"
#include "oracle.hpp"

using namespace fcsp;

namespace {

std::vector<std::vector<double>> uniform_probabilities(const Instance& inst) {
  std::vector<std::vector<double>> p;
  for (int g = 1; g <= inst.periods; ++g) {
    const size_t n = inst.support.at(g).size();
    p.emplace_back(n, 1.0 / static_cast<double>(n));
  }
  return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Extensive, MatchesEnumerationDdu) {
  const auto cfg = oracle::fixture("toy/config.json");
  auto be = make_backend();
  const auto e = oracle::enumerate(*be, cfg.instance, PlanningMode::DDU);
  const SolveReport r = solve_extensive(cfg.instance, PlanningMode::DDU, cfg.solve);
  EXPECT_LE(rel(r.objective * cfg.instance.options.cost_scale, e.best_value()), 1e-6);
  EXPECT_TRUE(r.converged);
  EXPECT_FALSE(r.dual_at_bound);
  EXPECT_LE(r.mccormick_residual, 1e-6);
}

TEST(Extensive, MatchesEnumerationDiu) {
  const auto cfg = oracle::fixture("toy/config.json");
  auto be = make_backend();
  const auto e = oracle::enumerate(*be, cfg.instance, PlanningMode::DIU);
  const SolveReport r = solve_extensive(cfg.instance, PlanningMode::DIU, cfg.solve);
  EXPECT_LE(rel(r.objective * cfg.instance.options.cost_scale, e.best_value()), 1e-6);
}

TEST(Extensive, MatchesEnumerationSdd) {
  const auto cfg = oracle::fixture("toy/config.json");
  auto be = make_backend();
  const auto probs = uniform_probabilities(cfg.instance);
  const auto e = oracle::enumerate(*be, cfg.instance, PlanningMode::SDD, &probs);
  const SolveReport r = solve_extensive(cfg.instance, PlanningMode::SDD, cfg.solve, &probs);
  EXPECT_LE(rel(r.objective * cfg.instance.options.cost_scale, e.best_value()), 1e-6);
  // The reported objective is the evaluator's value of the returned plan.
  const PlanValue v = evaluate_plan_objective(*be, cfg.instance, r.plan, PlanningMode::SDD, {}, &probs);
  EXPECT_LE(rel(v.total, r.objective * cfg.instance.options.cost_scale), 1e-6);
}

TEST(Extensive, IndependentAdoptionMakesModesCoincide) {
  const auto cfg = oracle::fixture("toy/config_independent.json");
  const SolveReport a = solve_extensive(cfg.instance, PlanningMode::DDU, cfg.solve);
  const SolveReport b = solve_extensive(cfg.instance, PlanningMode::DIU, cfg.solve);
  EXPECT_LE(rel(a.objective, b.objective), 1e-9);
}

TEST(Extensive, DoublingCostsDoublesObjective) {
  auto cfg = oracle::fixture("toy/config.json");
  const SolveReport a = solve_extensive(cfg.instance, PlanningMode::DDU, cfg.solve);
  Instance inst = cfg.instance;
  for (double* c : {&inst.cost.fcs, &inst.cost.cs, &inst.cost.pv, &inst.cost.ess, &inst.cost.line, &inst.cost.sub,
                    &inst.cost.grid_p, &inst.cost.grid_q, &inst.cost.unserved, &inst.cost.curtail, &inst.cost.shed})
    *c *= 2.0;
  const SolveReport b = solve_extensive(inst, PlanningMode::DDU, cfg.solve);
  EXPECT_LE(rel(b.objective, 2.0 * a.objective), 1e-6);
}

TEST(WorstCase, DistributionProperties) {
  const auto cfg = oracle::fixture("toy/config.json");
  const Instance& inst = cfg.instance;
  auto be = make_backend();
  const SolveReport r = solve_extensive(inst, PlanningMode::DDU, cfg.solve);
  const auto ddas = inst.ddas();
  const FcsHistory h = r.plan.history(inst);
  for (bool full : {false, true}) {
    const WorstCase wc = worst_case_distribution(*be, inst, r.plan, PlanningMode::DDU, full);
    for (int g = 1; g <= inst.periods; ++g) {
      const auto& d = wc.delta[g - 1];
      EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-6);
      for (double p : d) EXPECT_GE(p, -1e-9);
      EXPECT_LE(ddas_violation(ddas[g - 1], h, d), 1e-6);
      const InnerMax im = inner_max(*be, ddas[g - 1], h, wc.V[g - 1]);
      double dv = 0.0;
      for (size_t s = 0; s < d.size(); ++s) dv += d[s] * wc.V[g - 1][s];
      EXPECT_LE(rel(dv, im.value), 1e-6) << "period " << g << " full " << full;
    }
  }
}

TEST(WorstCase, SddRejected) {
  const auto cfg = oracle::fixture("toy/config.json");
  auto be = make_backend();
  const Plan p = solve_extensive(cfg.instance, PlanningMode::DDU, cfg.solve).plan;
  EXPECT_THROW(worst_case_distribution(*be, cfg.instance, p, PlanningMode::SDD, false), Error);
}

TEST(Benders, MatchesExtensive) {
  for (const char* f : {"toy/config.json", "toy/config_der.json"}) {
    auto cfg = oracle::fixture(f);
    const SolveReport e = solve_extensive(cfg.instance, PlanningMode::DDU, cfg.solve);
    for (int rounds : {0, 50}) {
      cfg.solve.relaxation_rounds = rounds;
      const SolveReport b = solve_benders(cfg.instance, PlanningMode::DDU, cfg.solve);
      EXPECT_TRUE(b.converged) << f << " rounds " << rounds;
      EXPECT_LE(rel(b.objective, e.objective), 1e-4) << f << " rounds " << rounds;
      EXPECT_LE(b.gap, 1e-4);
    }
  }
}

TEST(Benders, CutsUnderestimateSubproblemCost) {
  const auto cfg = oracle::fixture("toy/config_der.json");
  const Instance& inst = cfg.instance;
  auto be = make_backend();
  const SolveReport b = solve_benders(inst, PlanningMode::DDU, cfg.solve);
  ASSERT_FALSE(b.cuts.empty());
  std::mt19937_64 rng(3);
  for (int k = 0; k < 15; ++k) {
    const Plan p = oracle::random_plan(inst, rng);
    for (const BendersCut& c : b.cuts) {
      const double v = solve_subproblem(*be, inst, p, c.period, inst.support.at(c.period)[c.scenario]).value;
      EXPECT_LE(c.eval(p.periods[c.period - 1]), v + 1e-7 * std::max(1.0, v));
    }
  }
}

TEST(Benders, IterationLimitReported) {
  auto cfg = oracle::fixture("toy/config.json");
  cfg.solve.max_iter = 1;
  cfg.solve.relaxation_rounds = 0;  // the warm-start cuts alone can close the toy
  const SolveReport b = solve_benders(cfg.instance, PlanningMode::DDU, cfg.solve);
  EXPECT_FALSE(b.converged);
  EXPECT_FALSE(b.warnings.empty());
  EXPECT_EQ(b.iterations, 1);
}

TEST(Benders, LowerBoundsNondecreasing) {
  const auto cfg = oracle::fixture("toy/config.json");
  const SolveReport b = solve_benders(cfg.instance, PlanningMode::DDU, cfg.solve);
  for (size_t i = 1; i < b.log.size(); ++i) EXPECT_GE(b.log[i].lower, b.log[i - 1].lower - 1e-9);
  for (size_t i = 1; i < b.log.size(); ++i) EXPECT_LE(b.log[i].upper, b.log[i - 1].upper + 1e-9);
}

TEST(Subproblem, CompleteRecourse) {
  const auto cfg = oracle::fixture("toy/config_der.json");
  auto be = make_backend();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Plan p = oracle::random_plan(cfg.instance, rng);
    const int g = 1 + static_cast<int>(rng() % cfg.instance.periods);
    std::vector<double> theta(cfg.instance.ods.size());
    for (double& t : theta) t = u(rng);
    EXPECT_NO_THROW(solve_subproblem(*be, cfg.instance, p, g, theta));
  }
}

TEST(Subproblem, ZeroAdoptionHasNoChargingDemand) {
  const auto cfg = oracle::fixture("toy/config.json");
  const Instance& inst = cfg.instance;
  auto be = make_backend();
  std::mt19937_64 rng(1);
  const Plan p = oracle::random_plan(inst, rng);
  SubproblemModel keep;
  const auto r = solve_subproblem(*be, inst, p, 1, std::vector<double>(inst.ods.size(), 0.0), {}, &keep);
  for (const auto& blk : keep.blocks)
    for (size_t c = 0; c < inst.candidates.size(); ++c)
      for (int t = 0; t < 24; ++t) {
        EXPECT_NEAR(r.x[blk.lambda[c][t]], 0.0, 1e-9);
        EXPECT_NEAR(r.x[blk.lambda_un[c][t]], 0.0, 1e-9);
      }
}

TEST(Ambiguity, EmptySetDetected) {
  auto cfg = oracle::fixture("toy/config.json");
  Instance inst = cfg.instance;
  // A radius of zero around a mean no support point reaches.
  for (auto& od : inst.ambiguity.radii)
    for (auto& r : od) r.eps_mu = 0.0;
  for (auto& g : inst.support.periods)
    for (auto& s : g)
      for (double& t : s) t = 0.99;
  auto be = make_backend();
  EXPECT_THROW(check_ddas_nonempty(*be, inst, nullptr, true), Error);
}
