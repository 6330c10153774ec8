#include "fcsp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fcsp/error.hpp"
#include "fcsp/linear_model.hpp"

namespace fcsp {

ServiceCurve::ServiceCurve(std::vector<std::pair<double, double>> breakpoints)
    : breakpoints_(std::move(breakpoints)) {
  if (breakpoints_.size() < 2)
    throw Error(ErrorKind::InvalidParams, "service curve needs at least two breakpoints");
  if (breakpoints_.front().first != 0.0 || breakpoints_.front().second != 0.0)
    throw Error(ErrorKind::InvalidParams, "service curve must start at (0,0)");
  double prev_slope = kInf;
  for (size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
    const auto [z0, g0] = breakpoints_[k];
    const auto [z1, g1] = breakpoints_[k + 1];
    if (!(z1 > z0)) throw Error(ErrorKind::InvalidParams, "service breakpoints must increase in z");
    const double slope = (g1 - g0) / (z1 - z0);
    if (slope < 0.0) throw Error(ErrorKind::InvalidParams, "service curve must be nondecreasing");
    if (slope > prev_slope + 1e-12)
      throw Error(ErrorKind::NonConcaveServiceCurve, "service curve must be concave");
    prev_slope = slope;
    pieces_.push_back(Piece{slope, g0 - slope * z0});
  }
}

ServiceCurve ServiceCurve::linear(double rho) {
  return ServiceCurve({{0.0, 0.0}, {1.0, rho}});
}

double ServiceCurve::eval(double z) const {
  double g = kInf;
  for (const Piece& p : pieces_) g = std::min(g, p.slope * z + p.intercept);
  return g;
}

void CostParams::validate() const {
  for (double c : {fcs, cs, pv, ess, line, sub, grid_p, grid_q, unserved, curtail, shed})
    if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorKind::InvalidParams, "costs must be finite and >= 0");
  if (!(interest > 0.0)) throw Error(ErrorKind::InvalidParams, "interest rate must be positive");
  for (double l : {life_fcs, life_cs, life_pv, life_ess, life_line, life_sub})
    if (!(l >= 1.0)) throw Error(ErrorKind::InvalidParams, "lifespans must be >= 1 year");
}

const ServiceCurve& TechParams::service_curve() const {
  if (!service.pieces().empty()) return service;
  if (default_curve_.pieces().empty()) default_curve_ = ServiceCurve::linear(default_rho());
  return default_curve_;
}

double TechParams::pv_max(NodeId n) const {
  auto it = pv_max_node.find(n);
  return it == pv_max_node.end() ? pv_max_mw : it->second;
}

double TechParams::ess_max(NodeId n) const {
  auto it = ess_max_node.find(n);
  return it == ess_max_node.end() ? ess_max_mwh : it->second;
}

void TechParams::validate() const {
  if (!(range_mi > 0.0) || !(ed_kwh_per_mi > 0.0) || !(p_cs_kw > 0.0) || !(dt_h > 0.0))
    throw Error(ErrorKind::InvalidParams, "range, consumption, CS power and time step must be positive");
  for (double e : {eta_ev, eta_c, eta_d})
    if (!(e > 0.0) || e > 1.0) throw Error(ErrorKind::InvalidParams, "efficiencies must be in (0,1]");
  if (z_min < 0.0 || z_max < z_min) throw Error(ErrorKind::InvalidParams, "need 0 <= z_min <= z_max");
  if (iota_c < 0.0 || iota_d < 0.0) throw Error(ErrorKind::InvalidParams, "ESS rates must be >= 0");
}

double capital_recovery_factor(double rate, double lifespan_years) {
  if (!(rate > 0.0)) throw Error(ErrorKind::InvalidParams, "rate must be positive");
  if (!(lifespan_years >= 1.0)) throw Error(ErrorKind::InvalidParams, "lifespan must be >= 1");
  const double g = std::pow(1.0 + rate, lifespan_years);
  return rate * g / (g - 1.0);
}

void Instance::finalize() {
  if (periods < 1) throw Error(ErrorKind::InvalidParams, "need at least one period");
  if (ods.empty()) throw Error(ErrorKind::InvalidParams, "no OD pairs");
  if (base_flow.size() != ods.size()) throw Error(ErrorKind::InvalidParams, "base flow per OD required");
  cost.validate();
  tech.validate();
  diffusion.periods = periods;
  if (diffusion.ods.size() != ods.size())
    throw Error(ErrorKind::InvalidParams, "diffusion parameters per OD required");
  ambiguity.validate();
  if (ambiguity.radii.size() != ods.size())
    throw Error(ErrorKind::InvalidParams, "ambiguity radii per OD required");
  for (const auto& r : ambiguity.radii)
    if (static_cast<int>(r.size()) != periods)
      throw Error(ErrorKind::InvalidParams, "ambiguity radii per period required");

  coverage.clear();
  std::set<NodeId> cand;
  for (size_t od = 0; od < ods.size(); ++od) {
    try {
      coverage.push_back(generate_coverage_sets(tn, ods[od], tech.range_mi, tech.coverage_reserve));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InfeasibleArc) throw Error(ErrorKind::InfeasibleCoverage, e.what());
      throw;
    }
    for (NodeId n : ods[od].path_nodes)
      if (tn.is_candidate(n)) cand.insert(n);
    const std::set<NodeId> on_path(ods[od].path_nodes.begin(), ods[od].path_nodes.end());
    for (const auto& [n, v] : diffusion.ods[od].delta_d)
      if (!on_path.count(n))
        throw Error(ErrorKind::InvalidParams, "incentive factor on off-path node " + std::to_string(n));
  }
  candidates.assign(cand.begin(), cand.end());
  for (NodeId n : candidates) coupling.dn_of(n);
  for (const auto& [tn_node, dn_node] : coupling.tn_to_dn) dn.node_index(dn_node);
  lines = dn.expandable_lines();
  coeffs = adoption_coefficients(diffusion);
  support.validate(ods.size());
  if (static_cast<int>(support.periods.size()) != periods)
    throw Error(ErrorKind::EmptySupport, "support must cover every period");
  if (static_cast<int>(days.size()) != periods)
    throw Error(ErrorKind::SchemaError, "representative days must cover every period");
}

std::vector<DdasPeriod> Instance::ddas() const {
  return ambiguity_constraint_rows(coeffs, diffusion, ambiguity, support);
}

int Instance::candidate_index(NodeId n) const {
  auto it = std::lower_bound(candidates.begin(), candidates.end(), n);
  if (it == candidates.end() || *it != n) return -1;
  return static_cast<int>(it - candidates.begin());
}

std::vector<std::string> Instance::od_keys() const {
  std::vector<std::string> keys;
  for (const OdPair& od : ods) keys.push_back(od.key());
  return keys;
}

double Instance::traffic(size_t od, const RepresentativeDay& day, int hour) const {
  const std::string key = ods.at(od).key();
  auto it = day.traffic.find(key);
  if (it != day.traffic.end()) return it->second[hour];
  if (const HourlyProfile* s = find_profile(day.traffic_scale, key)) return base_flow[od] * (*s)[hour];
  if (const HourlyProfile* a = find_profile(day.traffic, key)) return (*a)[hour];
  return base_flow[od];
}

double Instance::pv_output(NodeId n, const RepresentativeDay& day, int hour) const {
  const HourlyProfile* p = find_profile(day.pv, std::to_string(n));
  return p ? (*p)[hour] : 0.0;
}

double Instance::p_load(int dn_index, const RepresentativeDay& day, int hour) const {
  const DnNode& nd = dn.nodes().at(dn_index);
  const std::string key = std::to_string(nd.id);
  auto it = day.p_load.find(key);
  if (it != day.p_load.end()) return it->second[hour];
  if (const HourlyProfile* s = find_profile(day.load_scale, key)) return nd.p_load_mw * (*s)[hour];
  return nd.p_load_mw;
}

double Instance::q_load(int dn_index, const RepresentativeDay& day, int hour) const {
  const DnNode& nd = dn.nodes().at(dn_index);
  const std::string key = std::to_string(nd.id);
  auto it = day.q_load.find(key);
  if (it != day.q_load.end()) return it->second[hour];
  if (const HourlyProfile* s = find_profile(day.load_scale, key)) return nd.q_load_mvar * (*s)[hour];
  return nd.q_load_mvar;
}

double Instance::investment_factor(int period) const {
  return std::pow(1.0 / (1.0 + cost.interest), period - 1);
}

double Instance::operation_factor(int period) const {
  return (std::pow(1.0 + cost.interest, period) - 1.0) / cost.interest;
}

Instance Instance::decision_independent() const {
  Instance copy = *this;
  for (OdDiffusion& p : copy.diffusion.ods) {
    for (auto& [n, v] : p.delta_d) v = 0.0;
    for (auto& m : p.delta_upsilon)
      for (auto& [n, v] : m) v = 0.0;
  }
  copy.coeffs = adoption_coefficients(copy.diffusion);
  return copy;
}

FcsHistory Plan::history(const Instance& inst) const {
  FcsHistory h(periods.size() + 1);
  for (size_t g = 0; g < periods.size(); ++g)
    for (size_t c = 0; c < inst.candidates.size(); ++c)
      if (periods[g].x.at(c) != 0) h[g + 1].insert(inst.candidates[c]);
  return h;
}

Plan empty_plan(const Instance& inst) {
  Plan p;
  const size_t nc = inst.candidates.size();
  for (int g = 0; g < inst.periods; ++g) {
    PeriodPlan pp;
    pp.x.assign(nc, 0);
    pp.z.assign(nc, 0);
    pp.pv_mw.assign(nc, 0.0);
    pp.ess_mwh.assign(nc, 0.0);
    pp.sub_mw.assign(nc, 0.0);
    pp.line.assign(inst.lines.size(), 0);
    p.periods.push_back(std::move(pp));
  }
  return p;
}

}  // namespace fcsp
