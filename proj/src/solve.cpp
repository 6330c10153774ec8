#include "fcsp/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "fcsp/error.hpp"
#include "fcsp/log.hpp"

namespace fcsp {

double BendersCut::eval(const PeriodPlan& u) const {
  double v = value;
  for (size_t c = 0; c < slope_x.size(); ++c) {
    v += slope_x[c] * (u.x[c] - at.x[c]);
    v += slope_z[c] * (u.z[c] - at.z[c]);
    v += slope_pv[c] * (u.pv_mw[c] - at.pv_mw[c]);
    v += slope_ess[c] * (u.ess_mwh[c] - at.ess_mwh[c]);
  }
  for (size_t l = 0; l < slope_line.size(); ++l) v += slope_line[l] * (u.line[l] - at.line[l]);
  return v;
}

SubproblemResult solve_subproblem(SolverBackend& backend, const Instance& inst, const Plan& plan,
                                  int period, const std::vector<double>& theta,
                                  const OperationOptions& op, SubproblemModel* keep) {
  SubproblemModel sp = build_subproblem(inst, plan, period, theta, op);
  SolveOptions so;
  const SolveResult r = solve_or_throw(backend, sp.model, so, "operation subproblem");
  if (!r.has_duals) throw Error(ErrorKind::DualUnavailable, "backend returned no duals for a subproblem");
  SubproblemResult out;
  out.value = r.objective;
  out.x = r.x;
  auto slope = [&](const std::vector<int>& cols, std::vector<double>& dst) {
    dst.assign(cols.size(), 0.0);
    for (size_t k = 0; k < cols.size(); ++k)
      if (cols[k] >= 0) dst[k] = r.col_dual[cols[k]];
  };
  slope(sp.link.x, out.link_slope_x);
  slope(sp.link.z, out.link_slope_z);
  slope(sp.link.pv, out.link_slope_pv);
  slope(sp.link.ess, out.link_slope_ess);
  slope(sp.link.line, out.link_slope_line);
  if (keep) *keep = std::move(sp);
  return out;
}

namespace {

LinearModel ddas_model(const DdasPeriod& ddas, const FcsHistory& x, const std::vector<double>* V) {
  LinearModel m;
  const size_t S = ddas.scenarios();
  Terms simplex;
  for (size_t s = 0; s < S; ++s) {
    const int j = m.add_column(indexed_name("pi", {static_cast<int>(s)}), 0, 1, V ? -(*V)[s] : 0.0);
    simplex.emplace_back(j, 1.0);
  }
  m.add_eq("simplex", simplex, 1.0, "ddas");
  for (size_t od = 0; od < ddas.rows.size(); ++od) {
    Terms m1, m2;
    for (size_t s = 0; s < S; ++s) {
      const double th = ddas.support[s][od];
      m1.emplace_back(static_cast<int>(s), th);
      m2.emplace_back(static_cast<int>(s), th * th);
    }
    const DdasOdRows& r = ddas.rows[od];
    m.add_row(indexed_name("mean", {static_cast<int>(od)}), m1, r.mean_lo.eval(x), r.mean_hi.eval(x), "ddas");
    m.add_row(indexed_name("second", {static_cast<int>(od)}), m2, r.second_lo.eval(x), r.second_hi.eval(x), "ddas");
  }
  return m;
}

}  // namespace

InnerMax inner_max(SolverBackend& backend, const DdasPeriod& ddas, const FcsHistory& x,
                   const std::vector<double>& V) {
  if (V.size() != ddas.scenarios()) throw Error(ErrorKind::InvalidParams, "value vector size mismatch");
  const LinearModel m = ddas_model(ddas, x, &V);
  const SolveResult r = backend.solve(m, SolveOptions{});
  if (r.status == SolveStatus::Infeasible)
    throw Error(ErrorKind::EmptyAmbiguitySet,
                "ambiguity set of period " + std::to_string(ddas.period) + " is empty at this plan");
  if (r.status != SolveStatus::Optimal)
    throw Error(ErrorKind::SolverFailure, "inner maximization failed");
  InnerMax out;
  out.value = -r.objective;
  out.pi = r.x;
  return out;
}

bool ddas_feasible(SolverBackend& backend, const DdasPeriod& ddas, const FcsHistory& x) {
  const LinearModel m = ddas_model(ddas, x, nullptr);
  const SolveResult r = backend.solve(m, SolveOptions{});
  if (r.status == SolveStatus::Infeasible) return false;
  if (r.status != SolveStatus::Optimal) throw Error(ErrorKind::SolverFailure, "ambiguity feasibility LP failed");
  return true;
}

void check_ddas_nonempty(SolverBackend& backend, const Instance& inst, const Plan* plan,
                         bool exhaustive) {
  const auto ddas = inst.ddas();
  auto fail = [&](int g, const std::string& where) {
    throw Error(ErrorKind::EmptyAmbiguitySet,
                "ambiguity set of period " + std::to_string(g) + " is empty " + where +
                    "; widen the radii or regenerate the support with more scenarios");
  };
  if (plan) {
    const FcsHistory h = plan->history(inst);
    for (const DdasPeriod& d : ddas)
      if (!ddas_feasible(backend, d, h)) fail(d.period, "at the plan");
  }
  if (!exhaustive) return;
  // Only indicators carrying a slope matter; enumerate those for small sets.
  for (const DdasPeriod& d : ddas) {
    std::set<std::pair<NodeId, int>> vars;
    for (const DdasOdRows& r : d.rows)
      for (const AffineX* f : {&r.mean_lo, &r.second_lo})
        for (const XTerm& t : f->terms) vars.insert({t.node, t.period});
    if (vars.size() > 16) {
      warn("too many decision indicators for an exhaustive ambiguity-set check; checking extremes only");
    }
    const std::vector<std::pair<NodeId, int>> list(vars.begin(), vars.end());
    const size_t n = list.size();
    const bool full = n <= 16;
    const size_t count = full ? (size_t{1} << n) : 2;
    for (size_t mask = 0; mask < count; ++mask) {
      FcsHistory h(inst.periods + 1);
      for (size_t k = 0; k < n; ++k) {
        const bool on = full ? ((mask >> k) & 1U) != 0 : mask == 1;
        if (on) h[list[k].second].insert(list[k].first);
      }
      if (!ddas_feasible(backend, d, h)) fail(d.period, "for some location pattern");
    }
  }
}

namespace {

std::vector<double> shifted_theta(const Instance& inst, int period, const std::vector<double>& theta,
                                  const FcsHistory& h) {
  std::vector<double> out = theta;
  for (size_t od = 0; od < out.size(); ++od) {
    const AffineX& e = inst.coeffs.at(od, period).expected;
    double shift = 0.0;
    for (const XTerm& t : e.terms)
      if (t.period < static_cast<int>(h.size()) && h[t.period].count(t.node)) shift += t.coef;
    out[od] = theta[od] + shift;
  }
  return out;
}

}  // namespace

PlanValue evaluate_plan_objective(SolverBackend& backend, const Instance& inst, const Plan& plan,
                                  PlanningMode mode, const OperationOptions& op,
                                  const std::vector<std::vector<double>>* probabilities) {
  const Instance src = mode == PlanningMode::DIU ? inst.decision_independent() : inst;
  const std::string bad = first_stage_violation(src, plan);
  if (!bad.empty()) throw Error(ErrorKind::InvalidParams, "plan violates first-stage constraints: " + bad);
  PlanValue pv;
  pv.first_stage = investment_cost(src, plan).total() * src.options.cost_scale;
  pv.total = pv.first_stage;
  const FcsHistory h = plan.history(src);
  const auto ddas = src.ddas();
  for (int g = 1; g <= src.periods; ++g) {
    const auto& sup = src.support.at(g);
    std::vector<double> V;
    for (const auto& theta : sup) {
      const std::vector<double> th = mode == PlanningMode::SDD ? shifted_theta(src, g, theta, h) : theta;
      V.push_back(solve_subproblem(backend, src, plan, g, th, op).value);
    }
    double value = 0.0;
    std::vector<double> pi;
    if (mode == PlanningMode::SDD) {
      if (!probabilities) throw Error(ErrorKind::InvalidParams, "sdd evaluation needs probabilities");
      pi = probabilities->at(g - 1);
      for (size_t s = 0; s < V.size(); ++s) value += pi.at(s) * V[s];
    } else {
      InnerMax im = inner_max(backend, ddas[g - 1], h, V);
      value = im.value;
      pi = std::move(im.pi);
    }
    pv.V.push_back(std::move(V));
    pv.period_value.push_back(value);
    pv.pi.push_back(std::move(pi));
    pv.total += value;
  }
  return pv;
}

SolveReport solve_extensive(const Instance& inst, PlanningMode mode, const SolveConfig& cfg,
                            const std::vector<std::vector<double>>* probabilities) {
  const auto start = std::chrono::steady_clock::now();
  auto backend = make_backend(cfg.backend);
  const Instance src = mode == PlanningMode::DIU ? inst.decision_independent() : inst;
  const double scale = src.options.cost_scale;
  double M = src.options.mccormick_m > 0.0 ? src.options.mccormick_m : default_mccormick_bound(src);

  SolveReport rep;
  rep.mode = mode;
  rep.method = "extensive";
  SolveOptions so;
  so.mip_rel_gap = cfg.gap_tol;
  so.threads = cfg.threads;
  so.verbose = cfg.verbose;
  so.time_limit = cfg.time_limit;

  for (int attempt = 0;; ++attempt) {
    ExtensiveModel em = build_extensive(inst, mode, M, cfg.op, probabilities);
    const SolveResult mip = solve_or_throw(*backend, em.model, so, "extensive model");
    Plan plan = extract_plan(src, em.fs, mip.x);

    // Fix the integer first stage and re-solve the LP so products are exact
    // and duals are available.
    LinearModel lp = em.model;
    for (int j = 0; j < lp.num_cols(); ++j)
      if (lp.col(j).type != VarType::Continuous) {
        const double v = std::round(mip.x[j]);
        lp.set_bounds(j, v, v);
      }
    lp.relax_integrality();
    const SolveResult fixed = solve_or_throw(*backend, lp, SolveOptions{}, "fixed-plan model");
    plan = extract_plan(src, em.fs, fixed.x);

    double residual = 0.0;
    bool at_bound = false;
    for (const DualBlock& b : em.duals) {
      for (const Product& p : b.products)
        residual = std::max(residual, std::abs(fixed.x[p.nu] - fixed.x[p.dual] * fixed.x[p.x]));
      for (size_t od = 0; od < b.alpha_mu.size(); ++od) {
        for (auto [a, bb] : {std::pair{b.alpha_mu[od], b.beta_mu[od]}, {b.alpha_v[od], b.beta_v[od]}}) {
          const double common = std::min(fixed.x[a], fixed.x[bb]);
          if (fixed.x[a] - common >= M - 1e-6 || fixed.x[bb] - common >= M - 1e-6) at_bound = true;
        }
      }
    }
    if (at_bound && attempt < cfg.max_m_doublings) {
      warn("dual variable at its McCormick bound; doubling M");
      M *= 2.0;
      rep.m_doublings = attempt + 1;
      continue;
    }
    rep.plan = plan;
    rep.mccormick_M = M;
    rep.dual_at_bound = at_bound;
    rep.mccormick_residual = residual;
    if (at_bound) rep.warnings.push_back("dual variable still at its McCormick bound after doubling");
    rep.objective = fixed.objective / scale;
    rep.upper_bound = rep.objective;
    rep.lower_bound = std::min(mip.bound, fixed.objective) / scale;
    rep.gap = std::abs(rep.upper_bound - rep.lower_bound) / std::max(std::abs(rep.upper_bound), 1e-12);
    rep.iterations = 1;
    if (mode == PlanningMode::SDD) {
      rep.worst_case = *probabilities;
    } else {
      if (!fixed.has_duals) throw Error(ErrorKind::DualUnavailable, "no duals for the fixed-plan model");
      for (const auto& rows : em.dual_rows) {
        std::vector<double> d;
        for (int r : rows) d.push_back(fixed.row_dual[r]);
        rep.worst_case.push_back(std::move(d));
      }
    }
    if (mip.status == SolveStatus::TimeLimit) {
      rep.converged = false;
      rep.warnings.push_back("time limit reached before proving optimality");
    }
    break;
  }
  rep.investment = investment_cost(src, rep.plan);
  rep.operation_cost = rep.objective - rep.investment.total();
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  rep.log.push_back(IterationRecord{1, rep.lower_bound, rep.upper_bound, rep.gap, ms});
  return rep;
}

}  // namespace fcsp

