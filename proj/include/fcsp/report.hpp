#pragma once

#include <iosfwd>
#include <string>

#include "fcsp/evaluate.hpp"

namespace fcsp {

// Plan as JSON keyed by node ids and line endpoints, so it can be read back
// against the same instance.
void write_plan_json(std::ostream& os, const Instance& inst, const Plan& plan);
Plan read_plan_json(std::istream& is, const Instance& inst);

// Summary of a solve: bounds, gap, M handling, cost breakdown and warnings.
void write_solve_report_json(std::ostream& os, const Instance& inst, const SolveReport& rep);

// One row per period plus a total row, with investment by asset class and
// operation cost, in dollars.
void write_cost_breakdown_csv(std::ostream& os, const Instance& inst, const SolveReport& rep);

void write_iteration_log_csv(std::ostream& os, const SolveReport& rep);

// Long format: period, scenario, probability, then one column per OD pair.
void write_distribution_csv(std::ostream& os, const Instance& inst,
                            const std::vector<std::vector<double>>& probabilities);

void write_evaluation_json(std::ostream& os, const Instance& inst, const EvaluationReport& rep);
void write_hourly_csv(std::ostream& os, const EvaluationReport& rep);
// Whitespace-separated columns readable by gnuplot.
void write_voltage_dat(std::ostream& os, const Instance& inst, const EvaluationReport& rep);
void write_loading_dat(std::ostream& os, const Instance& inst, const EvaluationReport& rep);

void write_coverage_csv(std::ostream& os, const Instance& inst);
void write_trajectory_csv(std::ostream& os, const Instance& inst,
                          const std::vector<std::vector<double>>& trajectory);

// Shortest round-trip representation of a double.
std::string format_number(double v);

}  // namespace fcsp
