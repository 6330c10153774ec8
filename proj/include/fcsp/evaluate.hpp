#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fcsp/solve.hpp"

namespace fcsp {

enum class TestKind { WCD, RGD, ED };

const char* to_string(TestKind k);
TestKind parse_test_kind(const std::string& text);

// Probability vectors over the support, one per period.
struct TestSet {
  TestKind kind = TestKind::WCD;
  std::vector<std::vector<double>> probabilities;  // [period-1][s]
  std::uint64_t seed = 0;
  bool fallback = false;  // RGD only: vertex mixtures were needed

  void validate(const Instance& inst) const;
};

// Worst-case distributions of the plan under the decision-dependent set.
TestSet worst_case_test_set(SolverBackend& backend, const Instance& inst, const Plan& plan,
                            const OperationOptions& op = {});

// Random distributions inside the ambiguity set at the plan: Dirichlet draws
// kept by rejection, or random mixtures of extreme points when rejection
// keeps failing.
std::vector<TestSet> random_test_sets(SolverBackend& backend, const Instance& inst, const Plan& plan,
                                      int count, std::uint64_t seed, int max_rejections = 2000);

// Minimum relative-entropy distribution matching the plan's expected first
// and second moments of adoption.
TestSet empirical_test_set(const Instance& inst, const Plan& plan);

struct HourStat {
  double covered_fraction = 1.0;  // 1 when there is no demand
  double demand = 0.0;            // expected EVs/h arriving at stations
  double covered = 0.0;
};

// Voltage and line-loading values averaged over scenarios at one
// (period, day, hour) slice.
struct AuditSlice {
  int period = 1;
  int day = 0;
  int hour = 1;
  std::vector<double> voltage;  // [dn node], p.u.
  std::vector<double> loading;  // [dn line], fraction of rating
};

struct EvaluationReport {
  TestKind kind = TestKind::WCD;
  bool relax_limits = false;
  std::vector<std::vector<std::vector<HourStat>>> hours;  // [period-1][day][hour-1]
  double covered_fraction = 1.0;                           // weighted by day weights
  std::vector<double> shedding_kwh_per_day;                // [period-1]
  std::vector<double> operation_cost;                      // [period-1], dollars
  double total_operation_cost = 0.0;
  std::vector<double> v_min, v_max;                        // [dn node], p.u.
  std::vector<double> loading_max;                         // [dn line]
  std::vector<std::vector<double>> trajectory;             // [od][period-1]
  std::optional<AuditSlice> slice;
};

struct SimulateOptions {
  bool relax_limits = false;
  bool allow_stranded = false;
  std::optional<AuditSlice> slice;  // only period/day/hour are read
};

EvaluationReport simulate_plan(SolverBackend& backend, const Instance& inst, const Plan& plan,
                               const TestSet& test, const SimulateOptions& opt = {});

struct Vd3rsResult {
  double value = 0.0;
  double f_ddu = 0.0;       // dollars, DDU objective of the DDU plan
  double f_diu_plan = 0.0;  // dollars, DDU objective of the DIU plan
  Plan ddu_plan;
  Plan diu_plan;
  SolveReport ddu;
  SolveReport diu;
};

// Relative regret of planning against the decision-independent set when
// adoption actually responds to the plan.
Vd3rsResult vd3rs(const Instance& inst, const SolveConfig& cfg, const std::string& method = "extensive");

// Same metric for given plans; both sides use the same evaluator.
double vd3rs_of_plans(SolverBackend& backend, const Instance& inst, const Plan& ddu_plan,
                      const Plan& diu_plan, const OperationOptions& op = {});

// Expected adoption per OD pair and period at the plan.
std::vector<std::vector<double>> diffusion_trajectory(const Instance& inst, const Plan& plan);

}  // namespace fcsp
