#include <gtest/gtest.h>

#include "fcsp/error.hpp"
#include "fcsp/solver.hpp"

using namespace fcsp;

// Dual convention: derivative of the optimal objective with respect to the
// active bound, checked by perturbing the bound.
TEST(Backend, RowDualIsObjectiveSensitivity) {
  auto b = make_backend("highs");
  for (double rhs : {2.0, 3.5}) {
    LinearModel m;
    const int x = m.add_column("x", 0, kInf, 3.0);
    const int y = m.add_column("y", 0, kInf, 5.0);
    const int r1 = m.add_ge("need", {{x, 1}, {y, 1}}, rhs);
    const int r2 = m.add_le("cap", {{x, 1}}, 1.0);
    const SolveResult s = b->solve(m, {});
    ASSERT_EQ(s.status, SolveStatus::Optimal);
    ASSERT_TRUE(s.has_duals);
    EXPECT_NEAR(s.objective, 3.0 + 5.0 * (rhs - 1.0), 1e-9);
    EXPECT_NEAR(s.row_dual[r1], 5.0, 1e-9);   // one more unit of need costs 5
    EXPECT_NEAR(s.row_dual[r2], -2.0, 1e-9);  // one more unit of cap saves 2
  }
}

TEST(Backend, ColumnDualIsBoundSensitivity) {
  auto b = make_backend("highs");
  LinearModel m;
  const int x = m.add_column("x", 1.5, 1.5, 0.0);  // fixed, like a link column
  const int y = m.add_column("y", 0, kInf, 4.0);
  m.add_ge("cover", {{x, 1}, {y, 1}}, 3.0);
  const SolveResult s = b->solve(m, {});
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, 6.0, 1e-9);
  EXPECT_NEAR(s.col_dual[x], -4.0, 1e-9);
}

TEST(Backend, MaximizationStyleDualsHaveOppositeSign) {
  auto b = make_backend("highs");
  LinearModel m;
  const int x = m.add_column("x", 0, kInf, -2.0);
  const int r = m.add_le("cap", {{x, 1}}, 4.0);
  const SolveResult s = b->solve(m, {});
  EXPECT_NEAR(s.objective, -8.0, 1e-9);
  EXPECT_NEAR(s.row_dual[r], -2.0, 1e-9);
}

TEST(Backend, SmallMip) {
  auto b = make_backend();
  LinearModel m;
  const int x = m.add_column("x", 0, 1, -5.0, VarType::Binary);
  const int y = m.add_column("y", 0, 1, -4.0, VarType::Binary);
  const int z = m.add_column("z", 0, 3, -1.0, VarType::Integer);
  m.add_le("w", {{x, 3}, {y, 2}, {z, 1}}, 4.5);
  const SolveResult s = b->solve(m, {});
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, -6.0, 1e-9);  // x + z, or y + 2z
  EXPECT_FALSE(s.has_duals);
  EXPECT_LE(s.bound, s.objective + 1e-9);
}

TEST(Backend, InfeasibleAndUnknown) {
  auto b = make_backend("highs");
  LinearModel m;
  const int x = m.add_column("x", 0, 1);
  m.add_ge("r", {{x, 1}}, 2.0);
  EXPECT_EQ(b->solve(m, {}).status, SolveStatus::Infeasible);
  try {
    solve_or_throw(*b, m, {}, "test");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
  try {
    make_backend("no-such-solver");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SolverUnavailable);
  }
}
