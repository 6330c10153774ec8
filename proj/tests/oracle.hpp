// Independent reference computations shared by unit and acceptance tests.
#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fcsp/config.hpp"
#include "fcsp/evaluate.hpp"

namespace oracle {

inline std::filesystem::path data_dir() { return FCSP_DATA_DIR; }

inline fcsp::LoadedConfig fixture(const std::string& rel) { return fcsp::load_config(data_dir() / rel); }

// Simulates a single full recharge at every occurrence of each candidate on
// the cyclic round trip and keeps nodes from which the end of each arc is
// reachable. Result is one node set per round-trip arc.
std::vector<std::set<fcsp::NodeId>> coverage_by_simulation(const fcsp::TransportNetwork& tn,
                                                           const fcsp::OdPair& od, double range);

// Every feasible first-stage point of an instance without PV or ESS:
// monotone binaries, integer spot counts, minimal substation capacity.
std::vector<fcsp::Plan> enumerate_plans(const fcsp::Instance& inst);

struct Enumeration {
  std::vector<fcsp::Plan> plans;
  std::vector<double> values;  // scaled objective per plan
  size_t best = 0;
  double best_value() const { return values[best]; }
  // Plans within rel_tol of the optimum.
  std::vector<size_t> ties(double rel_tol) const;
};

// Objective of each plan with the inner worst case solved as a primal LP
// over the ambiguity set; operation LPs cached per (period, scenario, period
// decisions). `mode` selects the ambiguity set (ddu or diu) or sdd with the
// given probabilities.
Enumeration enumerate(fcsp::SolverBackend& backend, const fcsp::Instance& inst, fcsp::PlanningMode mode,
                      const std::vector<std::vector<double>>* probabilities = nullptr);

// Plain logistic adoption recursion, [period] for period 0..G.
std::vector<double> logistic_adoption(const fcsp::OdDiffusion& p, const std::vector<std::set<fcsp::NodeId>>& open);

// Random feasible first-stage point (any PV/ESS sizes within limits).
fcsp::Plan random_plan(const fcsp::Instance& inst, std::mt19937_64& rng);

}  // namespace oracle
