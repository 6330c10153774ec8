#pragma once

#include <array>
#include <vector>

#include "fcsp/instance.hpp"
#include "fcsp/linear_model.hpp"

namespace fcsp {

enum class PlanningMode { DDU, DIU, SDD };

const char* to_string(PlanningMode mode);
PlanningMode parse_mode(const std::string& text);

// First-stage columns, indexed [candidate][period-1] or [line][period-1].
struct FirstStage {
  std::vector<std::vector<int>> x, x_new, z, z_new, pv, pv_new, ess, ess_new, sub, sub_new;
  std::vector<std::vector<int>> line, line_new;
};

// First-stage quantities an operation block depends on, for one period.
// Entries are -1 where the quantity is absent (for example PV disabled).
struct StageLink {
  std::vector<int> x, z, pv, ess;  // [candidate]
  std::vector<int> line;           // [expandable line]
};

StageLink stage_link(const FirstStage& fs, int period);

// Coverage, monotonicity, spot-count, PV/ESS, line and substation rows plus
// discounted investment costs on the objective.
FirstStage build_first_stage(LinearModel& m, VariableRegistry& reg, const Instance& inst);

// Adds columns fixed at the plan's period values and returns them as a link.
StageLink add_fixed_link(LinearModel& m, VariableRegistry& reg, const Instance& inst,
                         const Plan& plan, int period);

struct OperationOptions {
  bool allow_stranded = false;
  bool relax_limits = false;  // drop voltage and line-capacity limits
};

using HourIndex = std::array<int, 24>;

struct OperationBlock {
  Terms cost;  // scaled, weighted and discounted operation cost
  std::vector<std::vector<HourIndex>> fr;  // [od][candidate], -1 if not on a cover set
  std::vector<HourIndex> lambda, lambda_un;     // [candidate]
  std::vector<HourIndex> stranded;              // [od], -1 when disabled
  std::vector<HourIndex> zeta, u, p_ch;         // [dn node]
  std::vector<HourIndex> p_line, q_line;        // [dn line]
  HourIndex p_up{}, q_up{};
  std::vector<HourIndex> p_re, p_cu, p_esc, p_esd, e_es;  // [candidate], -1 if absent
  std::vector<HourIndex> demand_rows;  // [candidate] station-flow rows
  std::vector<std::array<double, 24>> ev_flow;  // [od] EVs/h at the scenario value
};

// Products needed when scenario values shift with the plan (sdd mode).
struct SddShift {
  const FirstStage* fs = nullptr;
  int period = 0;
};

// Operation constraints for one (period, scenario, day). Cost terms are
// returned, not added to the objective.
OperationBlock add_operation_block(LinearModel& m, VariableRegistry& reg, const Instance& inst,
                                   int period, int scenario, const std::vector<double>& theta,
                                   int day, const StageLink& link, const OperationOptions& opt,
                                   const SddShift* shift = nullptr);

// nu = alpha * x for binary x and alpha in [0, M].
void mccormick_rows(LinearModel& m, int nu, int alpha, int x, double M, const std::string& name);

struct Product {
  int nu = -1;
  int dual = -1;
  int x = -1;
};

// Dual variables of one period's ambiguity set and their objective terms.
struct DualBlock {
  int period = 0;
  int kappa = -1;
  std::vector<int> alpha_mu, alpha_v, beta_mu, beta_v;  // [od]
  std::vector<Product> products;
};

DualBlock add_dual_block(LinearModel& m, VariableRegistry& reg, const Instance& inst,
                         const DdasPeriod& ddas, const FirstStage& fs, double M);

// Left-hand side kappa + sum theta (beta - alpha) + theta^2 (beta - alpha).
Terms dual_row_terms(const DualBlock& b, const std::vector<double>& theta);

// Upper bound on a period's scaled operation cost under any plan.
double operation_cost_ceiling(const Instance& inst, int period);
double default_mccormick_bound(const Instance& inst);

struct ExtensiveModel {
  PlanningMode mode = PlanningMode::DDU;
  LinearModel model;
  VariableRegistry reg;
  FirstStage fs;
  std::vector<DualBlock> duals;                     // [period-1], empty for sdd
  std::vector<std::vector<int>> dual_rows;          // [period-1][s]
  std::vector<std::vector<Terms>> scenario_cost;    // [period-1][s]
  std::vector<std::vector<std::vector<OperationBlock>>> blocks;  // [period-1][s][d]
  std::vector<std::vector<double>> probabilities;   // sdd only, [period-1][s]
  double M = 0.0;
};

// Single-level model. For sdd, `probabilities` gives the fixed scenario weights.
ExtensiveModel build_extensive(const Instance& inst, PlanningMode mode, double M,
                               const OperationOptions& opt = {},
                               const std::vector<std::vector<double>>* probabilities = nullptr);

// Reads the first-stage plan out of a solution vector (rounding integers).
Plan extract_plan(const Instance& inst, const FirstStage& fs, const std::vector<double>& x);

// Fixes the first stage of a model to a plan.
void fix_first_stage(LinearModel& m, const Instance& inst, const FirstStage& fs, const Plan& plan);

struct SubproblemModel {
  LinearModel model;
  VariableRegistry reg;
  StageLink link;
  std::vector<OperationBlock> blocks;  // [day]
};

// Operation LP for one (period, scenario) over all representative days, with
// the plan's first-stage values held in fixed link columns.
SubproblemModel build_subproblem(const Instance& inst, const Plan& plan, int period,
                                 const std::vector<double>& theta, const OperationOptions& opt = {},
                                 int scenario = 0);

struct InvestmentBreakdown {
  double fcs = 0, cs = 0, pv = 0, ess = 0, line = 0, sub = 0;
  double total() const { return fcs + cs + pv + ess + line + sub; }
};

// Discounted investment cost of a plan in dollars.
InvestmentBreakdown investment_cost(const Instance& inst, const Plan& plan);

// Checks first-stage feasibility; returns an empty string when feasible.
std::string first_stage_violation(const Instance& inst, const Plan& plan);

}  // namespace fcsp
