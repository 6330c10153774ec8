#pragma once

#include <map>
#include <string>
#include <vector>

#include "fcsp/diffusion.hpp"
#include "fcsp/network.hpp"
#include "fcsp/scenario.hpp"

namespace fcsp {

// Concave, nondecreasing piecewise-linear service ability g(z) with g(0) = 0.
class ServiceCurve {
 public:
  ServiceCurve() = default;
  explicit ServiceCurve(std::vector<std::pair<double, double>> breakpoints);
  static ServiceCurve linear(double rho);

  double eval(double z) const;
  // g(z) = min over pieces of slope * z + intercept.
  struct Piece {
    double slope;
    double intercept;
  };
  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::vector<std::pair<double, double>>& breakpoints() const { return breakpoints_; }

 private:
  std::vector<std::pair<double, double>> breakpoints_;
  std::vector<Piece> pieces_;
};

struct CostParams {
  double fcs = 0.0;       // $ per new station
  double cs = 0.0;        // $ per new charging spot
  double pv = 0.0;        // $ per kW
  double ess = 0.0;       // $ per kWh
  double line = 0.0;      // $ per kVA per km
  double sub = 0.0;       // $ per kVA
  double grid_p = 0.0;    // $ per kWh imported
  double grid_q = 0.0;    // $ per kVArh imported, optional
  double unserved = 0.0;  // $ per kWh of unserved EV energy
  double curtail = 0.0;   // $ per kWh curtailed
  double shed = 0.0;      // $ per kWh shed
  double interest = 0.06;
  double life_fcs = 20, life_cs = 10, life_pv = 20, life_ess = 10, life_line = 30, life_sub = 30;
  double period_years = 2.0;

  void validate() const;
};

struct TechParams {
  double range_mi = 360.0;
  double ed_kwh_per_mi = 0.24;
  double p_cs_kw = 120.0;
  double eta_ev = 0.92;
  double z_min = 1.0;
  double z_max = 90.0;
  double pv_max_mw = 6.0;
  double ess_max_mwh = 3.0;
  std::map<NodeId, double> pv_max_node;   // per-node overrides
  std::map<NodeId, double> ess_max_node;
  double iota_c = 0.4;
  double iota_d = 0.5;
  double eta_c = 0.95;
  double eta_d = 0.95;
  double dt_h = 1.0;
  double coverage_reserve = 0.0;
  ServiceCurve service;  // empty means the default linear curve

  double ev_energy_kwh() const { return ed_kwh_per_mi * range_mi / eta_ev; }
  double default_rho() const { return p_cs_kw * dt_h * eta_ev / (ed_kwh_per_mi * range_mi); }
  const ServiceCurve& service_curve() const;
  double pv_max(NodeId n) const;
  double ess_max(NodeId n) const;
  void validate() const;

 private:
  mutable ServiceCurve default_curve_;
};

struct ModelOptions {
  double cost_scale = 1e-6;  // objective unit per dollar
  bool allow_stranded = false;
  bool pv = true;
  bool ess = true;
  double mccormick_m = 0.0;  // 0 derives M from the data
  bool grid_q_price = false;
};

// Standard annuity factor.
double capital_recovery_factor(double rate, double lifespan_years);

struct Instance {
  std::string name;
  TransportNetwork tn;
  DistributionNetwork dn;
  CouplingMap coupling;
  std::vector<OdPair> ods;
  std::vector<OdCoverage> coverage;
  std::vector<double> base_flow;  // vehicles/h, scaled by traffic_scale profiles
  DiffusionParams diffusion;
  AmbiguityParams ambiguity;
  AdoptionCoefficients coeffs;
  ScenarioSupport support;
  DaySchedule days;
  CostParams cost;
  TechParams tech;
  ModelOptions options;
  int periods = 0;
  std::vector<NodeId> candidates;  // on-path candidate nodes, ascending
  std::vector<int> lines;          // expandable DN line indices

  // Recomputes coverage, candidates and adoption coefficients, and validates.
  void finalize();

  std::vector<DdasPeriod> ddas() const;
  int candidate_index(NodeId n) const;  // -1 if not a candidate
  std::vector<std::string> od_keys() const;

  // Vehicles/h on path od at (period, day, hour).
  double traffic(size_t od, const RepresentativeDay& day, int hour) const;
  double pv_output(NodeId n, const RepresentativeDay& day, int hour) const;
  double p_load(int dn_index, const RepresentativeDay& day, int hour) const;
  double q_load(int dn_index, const RepresentativeDay& day, int hour) const;

  double investment_factor(int period) const;
  double operation_factor(int period) const;

  // Copy with all incentive factors set to zero (decision-independent set).
  Instance decision_independent() const;
};

// First-stage plan indexed by candidate position and expandable-line position.
struct PeriodPlan {
  std::vector<int> x;
  std::vector<int> z;
  std::vector<double> pv_mw;
  std::vector<double> ess_mwh;
  std::vector<double> sub_mw;
  std::vector<int> line;

  bool operator==(const PeriodPlan&) const = default;
};

struct Plan {
  std::vector<PeriodPlan> periods;  // [period-1]

  FcsHistory history(const Instance& inst) const;
  bool operator==(const Plan&) const = default;
};

Plan empty_plan(const Instance& inst);

}  // namespace fcsp
