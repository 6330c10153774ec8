#pragma once

#include <string>
#include <vector>

#include "fcsp/builder.hpp"
#include "fcsp/solver.hpp"

namespace fcsp {

struct SolveConfig {
  std::string backend;      // empty: DDRO_SOLVER or highs
  double gap_tol = 1e-4;    // relative optimality gap
  int max_iter = 200;       // Benders iterations
  int relaxation_rounds = 50;  // LP-relaxation cut rounds before the integer master
  double time_limit = kInf; // seconds, whole solve
  int threads = 1;
  int max_m_doublings = 3;
  bool verbose = false;
  OperationOptions op;
};

struct IterationRecord {
  int iter = 0;
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
  double wall_ms = 0.0;
};

// Optimality cut of one (period, scenario): value >= V + slope . (u - u*).
struct BendersCut {
  int period = 0;
  int scenario = 0;
  double value = 0.0;  // scaled
  PeriodPlan at;
  std::vector<double> slope_x, slope_z, slope_pv, slope_ess, slope_line;

  double eval(const PeriodPlan& u) const;
};

// Result of planning. Money in dollars.
struct SolveReport {
  PlanningMode mode = PlanningMode::DDU;
  std::string method;
  Plan plan;
  double objective = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> log;
  std::vector<std::vector<double>> worst_case;  // [period-1][s]
  double mccormick_M = 0.0;
  int m_doublings = 0;
  bool dual_at_bound = false;
  double mccormick_residual = 0.0;
  InvestmentBreakdown investment;
  double operation_cost = 0.0;
  bool converged = true;
  std::vector<BendersCut> cuts;
  std::vector<std::string> warnings;
};

struct SubproblemResult {
  double value = 0.0;                 // scaled cost
  std::vector<double> x;              // primal solution
  std::vector<double> link_slope_x, link_slope_z, link_slope_pv, link_slope_ess, link_slope_line;
};

SubproblemResult solve_subproblem(SolverBackend& backend, const Instance& inst, const Plan& plan,
                                  int period, const std::vector<double>& theta,
                                  const OperationOptions& op = {}, SubproblemModel* keep = nullptr);

struct InnerMax {
  double value = 0.0;
  std::vector<double> pi;
};

// max sum pi_s V_s over the ambiguity set at plan history x.
InnerMax inner_max(SolverBackend& backend, const DdasPeriod& ddas, const FcsHistory& x,
                   const std::vector<double>& V);

// Some pi in the ambiguity set at x exists.
bool ddas_feasible(SolverBackend& backend, const DdasPeriod& ddas, const FcsHistory& x);

// Checks the ambiguity set is non-empty at the given plan (or, with
// exhaustive=true and few candidates, at every binary location pattern).
void check_ddas_nonempty(SolverBackend& backend, const Instance& inst, const Plan* plan,
                         bool exhaustive);

struct PlanValue {
  double first_stage = 0.0;                   // scaled
  std::vector<std::vector<double>> V;         // [period-1][s], scaled
  std::vector<double> period_value;           // scaled inner max or expectation
  std::vector<std::vector<double>> pi;        // maximizing / fixed distribution
  double total = 0.0;                         // scaled
};

// Objective of a fixed plan: investment plus, per period, the worst case
// (ddu/diu) or the expectation under `probabilities` (sdd).
PlanValue evaluate_plan_objective(SolverBackend& backend, const Instance& inst, const Plan& plan,
                                  PlanningMode mode, const OperationOptions& op = {},
                                  const std::vector<std::vector<double>>* probabilities = nullptr);

SolveReport solve_extensive(const Instance& inst, PlanningMode mode, const SolveConfig& cfg,
                            const std::vector<std::vector<double>>* probabilities = nullptr);

SolveReport solve_benders(const Instance& inst, PlanningMode mode, const SolveConfig& cfg);

struct WorstCase {
  std::vector<std::vector<double>> delta;  // [period-1][s]
  std::vector<double> inner_value;         // scaled, per period
  std::vector<std::vector<double>> V;      // scaled SP costs
};

// Worst-case distribution of a fixed plan from the duals of the
// dual-feasibility rows. `full` keeps every second-stage copy in the model;
// otherwise scenario costs are pre-solved and enter as constants.
WorstCase worst_case_distribution(SolverBackend& backend, const Instance& inst, const Plan& plan,
                                  PlanningMode mode, bool full, const OperationOptions& op = {});

}  // namespace fcsp
