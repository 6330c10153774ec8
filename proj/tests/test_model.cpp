#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fcsp/builder.hpp"
#include "fcsp/error.hpp"
#include "oracle.hpp"

using namespace fcsp;

TEST(LinearModelTest, RowsMergeDuplicatesAndDropZeros) {
  LinearModel m;
  const int a = m.add_column("a", 0, 1);
  const int b = m.add_column("b", 0, 1);
  const int r = m.add_le("r", {{a, 1.0}, {b, 2.0}, {a, 0.5}, {b, -2.0}}, 3.0);
  const Terms t = m.row_terms(r);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].first, a);
  EXPECT_DOUBLE_EQ(t[0].second, 1.5);
  EXPECT_DOUBLE_EQ(m.max_violation({1.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(m.max_violation({3.0, 0.0}), 2.0);  // bound 1 exceeded by 2, row by 1.5
}

TEST(LinearModelTest, ValidateRejectsBadData) {
  LinearModel m;
  const int a = m.add_column("a", 0, 1);
  m.add_le("r", {{a, std::nan("")}}, 1.0);
  EXPECT_THROW(m.validate(), Error);
  LinearModel n;
  n.add_column("a", 2, 1);
  EXPECT_THROW(n.validate(), Error);
}

TEST(LinearModelTest, LpExportFormat) {
  LinearModel m;
  const int x = m.add_column("x", 0, 1, 1.0 / 3.0, VarType::Binary);
  const int z = m.add_column("z", 0, 4, 2.0, VarType::Integer);
  const int y = m.add_column("y", -kInf, kInf);
  m.add_row("band", {{x, 1}, {y, -1}}, -1.0, 2.0);
  m.add_eq("eq", {{z, 1}, {y, 1}}, 3.0);
  std::ostringstream os;
  m.export_lp(os);
  const std::string lp = os.str();
  EXPECT_NE(lp.find("0.33333333333333331 x"), std::string::npos);
  EXPECT_NE(lp.find("band_lo:"), std::string::npos);
  EXPECT_NE(lp.find("band_hi:"), std::string::npos);
  EXPECT_NE(lp.find(" y free"), std::string::npos);
  // Binaries are written as bounded generals.
  const size_t gen = lp.find("General\n");
  ASSERT_NE(gen, std::string::npos);
  EXPECT_NE(lp.find(" x\n", gen), std::string::npos);
  EXPECT_NE(lp.find(" z\n", gen), std::string::npos);
  EXPECT_EQ(lp.find(" y\n", gen), std::string::npos);
  EXPECT_NE(lp.find("End"), std::string::npos);
}

TEST(Registry, DuplicateBindThrows) {
  LinearModel m;
  VariableRegistry reg;
  const int a = reg.add(m, "x", {1, 2}, 0, 1);
  EXPECT_EQ(reg.at("x", {1, 2}), a);
  EXPECT_EQ(reg.find("x", {2, 1}), -1);
  EXPECT_THROW(reg.add(m, "x", {1, 2}, 0, 1), Error);
  EXPECT_EQ(indexed_name("x", {1, 2}), "x(1,2)");
}

TEST(Economics, CapitalRecoveryFactor) {
  // 6 % over 20 years: 0.06 * 1.06^20 / (1.06^20 - 1).
  const double g = std::pow(1.06, 20);
  EXPECT_NEAR(capital_recovery_factor(0.06, 20), 0.06 * g / (g - 1), 1e-15);
  EXPECT_NEAR(capital_recovery_factor(0.06, 20), 0.0871845, 1e-7);
  EXPECT_THROW(capital_recovery_factor(0.0, 20), Error);
}

TEST(Service, CurveMustBeConcave) {
  EXPECT_NO_THROW(ServiceCurve({{0, 0}, {1, 4}, {2, 7}, {3, 9}}));
  try {
    ServiceCurve({{0, 0}, {1, 2}, {2, 5}});
    FAIL() << "convex curve accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonConcaveServiceCurve);
  }
  EXPECT_THROW(ServiceCurve({{0, 1}, {1, 2}}), Error);
  const ServiceCurve c({{0, 0}, {1, 4}, {3, 6}});
  EXPECT_DOUBLE_EQ(c.eval(0.5), 2.0);
  EXPECT_DOUBLE_EQ(c.eval(2.0), 5.0);
}

TEST(Builder, ToyFirstStageSize) {
  const auto cfg = oracle::fixture("toy/config.json");
  const Instance& inst = cfg.instance;
  EXPECT_EQ(inst.candidates, (std::vector<NodeId>{1, 2, 3}));
  const ExtensiveModel em = build_extensive(inst, PlanningMode::DDU, 10.0);
  int binaries = 0, integers = 0;
  for (const Column& c : em.model.cols()) {
    binaries += c.type == VarType::Binary;
    integers += c.type == VarType::Integer;
  }
  EXPECT_EQ(binaries, 8);  // station x per candidate and period, plus line expansion per period
  EXPECT_EQ(integers, 6);
  EXPECT_EQ(em.dual_rows.size(), 2u);
  EXPECT_EQ(em.dual_rows[0].size(), 3u);
}

TEST(Builder, McCormickRowsAreExactAtBinaryPoints) {
  for (int xv : {0, 1})
    for (double alpha : {0.0, 2.5, 10.0}) {
      LinearModel m;
      const int x = m.add_column("x", xv, xv);
      const int a = m.add_column("a", alpha, alpha);
      const int nu = m.add_column("nu", 0, 10.0);
      mccormick_rows(m, nu, a, x, 10.0, "p");
      // nu = alpha * x is feasible and the only feasible value.
      std::vector<double> sol{double(xv), alpha, alpha * xv};
      EXPECT_LE(m.max_violation(sol), 1e-12);
      sol[2] += 0.1;
      EXPECT_GT(m.max_violation(sol), 1e-3);
    }
}

TEST(Builder, InvestmentCostOfPlan) {
  const auto cfg = oracle::fixture("toy/config.json");
  const Instance& inst = cfg.instance;
  Plan p = empty_plan(inst);
  // Station at node 3 in period 1 with 2 spots, nothing else.
  const int c = inst.candidate_index(3);
  for (auto& pp : p.periods) {
    pp.x[c] = 1;
    pp.z[c] = 2;
    pp.sub_mw[c] = 0.24;
  }
  for (size_t k = 0; k < inst.candidates.size(); ++k)
    if (static_cast<int>(k) != c)
      for (auto& pp : p.periods) pp.sub_mw[k] = inst.coupling.initial_substation(inst.candidates[k]);
  const auto inv = investment_cost(inst, p);
  const auto& cost = inst.cost;
  EXPECT_NEAR(inv.fcs, capital_recovery_factor(0.06, cost.life_fcs) * cost.fcs, 1e-6);
  EXPECT_NEAR(inv.cs, capital_recovery_factor(0.06, cost.life_cs) * cost.cs * 2, 1e-6);
  EXPECT_NEAR(inv.sub, capital_recovery_factor(0.06, cost.life_sub) * cost.sub * 1000 * (0.24 - 0.1), 1e-6);
  EXPECT_DOUBLE_EQ(inv.line, 0.0);
}
