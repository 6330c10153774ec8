#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "fcsp/error.hpp"
#include "fcsp/log.hpp"
#include "fcsp/solve.hpp"

namespace fcsp {

namespace {

struct Master {
  LinearModel model;
  VariableRegistry reg;
  FirstStage fs;
  std::vector<DualBlock> duals;
  std::vector<std::vector<int>> omega;  // [period-1][s]
};

// Station indicators (candidate index, period) that must differ from a
// pattern whose ambiguity set is empty.
struct NoGood {
  std::vector<std::pair<size_t, int>> on, off;
};

NoGood empty_set_cut(const Instance& inst, const DdasPeriod& ddas, const FcsHistory& h) {
  std::set<std::pair<size_t, int>> vars;
  for (const DdasOdRows& r : ddas.rows)
    for (const AffineX* f : {&r.mean_lo, &r.mean_hi, &r.second_lo, &r.second_hi})
      for (const XTerm& t : f->terms) {
        const auto it = std::find(inst.candidates.begin(), inst.candidates.end(), t.node);
        if (it != inst.candidates.end() && t.period >= 1)
          vars.insert({static_cast<size_t>(it - inst.candidates.begin()), t.period});
      }
  NoGood ng;
  for (const auto& [c, g] : vars) (h[g].count(inst.candidates[c]) ? ng.on : ng.off).push_back({c, g});
  return ng;
}

// Cost of a (period, scenario) operation problem with the first-stage link
// columns free within their ranges: a lower bound on that cost under any plan.
double scenario_floor(SolverBackend& backend, const Instance& inst, int period, const std::vector<double>& theta,
                      const OperationOptions& op) {
  SubproblemModel sp = build_subproblem(inst, empty_plan(inst), period, theta, op);
  LinearModel& m = sp.model;
  for (size_t c = 0; c < inst.candidates.size(); ++c) {
    const NodeId n = inst.candidates[c];
    m.set_bounds(sp.link.x[c], 0.0, 1.0);
    m.set_bounds(sp.link.z[c], 0.0, inst.tech.z_max);
    if (sp.link.pv[c] >= 0) m.set_bounds(sp.link.pv[c], 0.0, inst.tech.pv_max(n));
    if (sp.link.ess[c] >= 0) m.set_bounds(sp.link.ess[c], 0.0, inst.tech.ess_max(n));
  }
  for (int l : sp.link.line) m.set_bounds(l, 0.0, 1.0);
  return solve_or_throw(backend, m, SolveOptions{}, "relaxed operation problem").objective;
}

// Cut at a fractional first-stage point. The operation cost is convex in the
// link values, so the tangent is valid everywhere; it is stored relative to
// the all-zero period plan.
BendersCut fractional_cut(SolverBackend& backend, const Instance& inst, const StageLink& at,
                          const std::vector<double>& x, int period, int scenario, const OperationOptions& op) {
  const Plan zero = empty_plan(inst);
  SubproblemModel sp = build_subproblem(inst, zero, period, inst.support.at(period)[scenario], op);
  auto fix = [&](const std::vector<int>& master_cols, const std::vector<int>& sp_cols) {
    for (size_t i = 0; i < sp_cols.size(); ++i)
      if (sp_cols[i] >= 0 && master_cols[i] >= 0) sp.model.set_bounds(sp_cols[i], x[master_cols[i]], x[master_cols[i]]);
  };
  fix(at.x, sp.link.x);
  fix(at.z, sp.link.z);
  fix(at.pv, sp.link.pv);
  fix(at.ess, sp.link.ess);
  fix(at.line, sp.link.line);
  const SolveResult r = solve_or_throw(backend, sp.model, SolveOptions{}, "operation subproblem");
  if (!r.has_duals) throw Error(ErrorKind::DualUnavailable, "backend returned no duals for a subproblem");

  BendersCut c;
  c.period = period;
  c.scenario = scenario;
  c.at = zero.periods[period - 1];
  c.value = r.objective;
  auto slope = [&](const std::vector<int>& master_cols, const std::vector<int>& sp_cols, std::vector<double>& dst) {
    dst.assign(sp_cols.size(), 0.0);
    for (size_t i = 0; i < sp_cols.size(); ++i) {
      if (sp_cols[i] < 0) continue;
      dst[i] = r.col_dual[sp_cols[i]];
      if (master_cols[i] >= 0) c.value -= dst[i] * x[master_cols[i]];
    }
  };
  slope(at.x, sp.link.x, c.slope_x);
  slope(at.z, sp.link.z, c.slope_z);
  slope(at.pv, sp.link.pv, c.slope_pv);
  slope(at.ess, sp.link.ess, c.slope_ess);
  slope(at.line, sp.link.line, c.slope_line);
  return c;
}

// With `nominal` the robust dual is replaced by a uniform expectation; that
// master only serves to pick points for the first cuts.
Master build_master(const Instance& inst, double M, const std::vector<BendersCut>& cuts,
                    const std::vector<std::vector<double>>& floors, const std::vector<NoGood>& nogoods,
                    bool nominal = false) {
  Master mp;
  mp.fs = build_first_stage(mp.model, mp.reg, inst);
  const auto ddas = inst.ddas();
  for (int g = 1; g <= inst.periods; ++g) {
    const auto& sup = inst.support.at(g);
    if (!nominal) mp.duals.push_back(add_dual_block(mp.model, mp.reg, inst, ddas[g - 1], mp.fs, M));
    mp.omega.emplace_back();
    for (size_t s = 0; s < sup.size(); ++s) {
      const double cost = nominal ? 1.0 / static_cast<double>(sup.size()) : 0.0;
      const int w = mp.reg.add(mp.model, "omega", {g, static_cast<int>(s)}, std::max(0.0, floors[g - 1][s]), kInf, cost);
      mp.omega.back().push_back(w);
      if (nominal) continue;
      Terms row = dual_row_terms(mp.duals.back(), sup[s]);
      row.emplace_back(w, -1.0);
      mp.model.add_ge(indexed_name("dual_feas", {g, static_cast<int>(s)}), row, 0, "dual_feasibility");
    }
  }
  int k = 0;
  for (const BendersCut& c : cuts) {
    const StageLink link = stage_link(mp.fs, c.period);
    Terms row{{mp.omega[c.period - 1][c.scenario], 1.0}};
    double rhs = c.value;
    auto add = [&](const std::vector<int>& cols, const std::vector<double>& slope, auto at) {
      for (size_t i = 0; i < slope.size(); ++i) {
        if (slope[i] == 0.0) continue;
        if (cols[i] < 0) continue;
        row.emplace_back(cols[i], -slope[i]);
        rhs -= slope[i] * at(i);
      }
    };
    add(link.x, c.slope_x, [&](size_t i) { return double(c.at.x[i]); });
    add(link.z, c.slope_z, [&](size_t i) { return double(c.at.z[i]); });
    add(link.pv, c.slope_pv, [&](size_t i) { return c.at.pv_mw[i]; });
    add(link.ess, c.slope_ess, [&](size_t i) { return c.at.ess_mwh[i]; });
    add(link.line, c.slope_line, [&](size_t i) { return double(c.at.line[i]); });
    mp.model.add_ge(indexed_name("cut", {k++}), row, rhs, "optimality_cut");
  }
  k = 0;
  for (const NoGood& ng : nogoods) {
    Terms row;
    for (auto [c, g] : ng.on) row.emplace_back(mp.fs.x[c][g - 1], -1.0);
    for (auto [c, g] : ng.off) row.emplace_back(mp.fs.x[c][g - 1], 1.0);
    mp.model.add_ge(indexed_name("nogood", {k++}), row, 1.0 - static_cast<double>(ng.on.size()), "feasibility_cut");
  }
  mp.model.validate();
  return mp;
}

bool duals_at_bound(const Master& mp, const std::vector<double>& x, double M) {
  for (const DualBlock& b : mp.duals)
    for (size_t od = 0; od < b.alpha_mu.size(); ++od)
      for (auto [a, c] : {std::pair{b.alpha_mu[od], b.beta_mu[od]}, {b.alpha_v[od], b.beta_v[od]}}) {
        const double common = std::min(x[a], x[c]);
        if (x[a] - common >= M - 1e-6 || x[c] - common >= M - 1e-6) return true;
      }
  return false;
}

}  // namespace

SolveReport solve_benders(const Instance& inst, PlanningMode mode, const SolveConfig& cfg) {
  if (mode == PlanningMode::SDD)
    throw Error(ErrorKind::Config, "the decomposition handles ddu and diu; use the extensive method for sdd");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  auto backend = make_backend(cfg.backend);
  const Instance src = mode == PlanningMode::DIU ? inst.decision_independent() : inst;
  const double scale = src.options.cost_scale;
  double M = src.options.mccormick_m > 0.0 ? src.options.mccormick_m : default_mccormick_bound(src);
  const auto ddas = src.ddas();

  SolveReport rep;
  rep.mode = mode;
  rep.method = "benders";
  std::vector<BendersCut> cuts;
  std::vector<NoGood> nogoods;
  double lower = -kInf, upper = kInf;
  Plan best;
  bool have_best = false;
  bool last_at_bound = false;

  std::vector<std::vector<double>> floors;
  for (int g = 1; g <= src.periods; ++g) {
    floors.emplace_back();
    for (const auto& theta : src.support.at(g)) floors.back().push_back(scenario_floor(*backend, src, g, theta, cfg.op));
  }

  // The master starts with a loose gap that tightens with the Benders gap;
  // its dual bound stays a valid lower bound either way.
  const double tight_gap = std::min(cfg.gap_tol * 0.1, 1e-6);
  double master_gap = std::max(tight_gap, 1e-2);
  SolveOptions so;
  so.threads = cfg.threads;
  so.verbose = cfg.verbose;

  // Cheap first pass: cuts at LP-relaxed points of the nominal master until
  // its bound stalls. The robust master relaxes too weakly to steer this.
  // Points are pulled halfway toward a running core point, which keeps the
  // separation from zigzagging between extremes.
  {
    std::vector<double> core, history;
    for (int k = 0; k < cfg.relaxation_rounds; ++k) {
      Master mp = build_master(src, M, cuts, floors, nogoods, true);
      mp.model.relax_integrality();
      const SolveResult r = solve_or_throw(*backend, mp.model, SolveOptions{}, "relaxed master problem");
      if (core.empty()) core = r.x;
      std::vector<double> sep(r.x.size());
      for (size_t j = 0; j < sep.size(); ++j) sep[j] = 0.5 * (r.x[j] + core[j]);
      core = sep;
      for (int g = 1; g <= src.periods; ++g) {
        const StageLink link = stage_link(mp.fs, g);
        for (size_t s = 0; s < src.support.at(g).size(); ++s)
          cuts.push_back(fractional_cut(*backend, src, link, sep, g, static_cast<int>(s), cfg.op));
      }
      history.push_back(r.objective);
      if (cfg.verbose) warn("relaxation round " + std::to_string(k + 1) + ": bound " + std::to_string(r.objective / scale));
      const size_t n = history.size();
      if (n > 5 && history[n - 1] - history[n - 6] < 1e-4 * std::max(1.0, std::abs(history[n - 1]))) break;
    }
  }

  int iter = 0;
  bool converged = false;
  while (iter < cfg.max_iter) {
    ++iter;
    so.time_limit = std::isfinite(cfg.time_limit) ? std::max(1.0, cfg.time_limit - elapsed()) : kInf;
    so.mip_rel_gap = master_gap;
    Master mp = build_master(src, M, cuts, floors, nogoods);
    const SolveResult r = solve_or_throw(*backend, mp.model, so, "master problem");
    lower = std::max(lower, r.bound);
    last_at_bound = duals_at_bound(mp, r.x, M);
    const Plan plan = extract_plan(src, mp.fs, r.x);
    const FcsHistory h = plan.history(src);

    // Where the ambiguity set is empty the dual is unbounded and only the
    // box holds it; exclude that station pattern and resolve.
    bool empty_set = false;
    for (int g = 1; g <= src.periods; ++g)
      if (!ddas_feasible(*backend, ddas[g - 1], h)) {
        nogoods.push_back(empty_set_cut(src, ddas[g - 1], h));
        if (nogoods.back().on.empty() && nogoods.back().off.empty())
          throw Error(ErrorKind::EmptyAmbiguitySet,
                      "ambiguity set of period " + std::to_string(g) + " is empty for every plan");
        empty_set = true;
      }
    if (empty_set) {
      const double gap = std::isfinite(lower) && std::isfinite(upper) ? (upper - lower) / std::max(std::abs(upper), 1e-12) : kInf;
      rep.log.push_back(IterationRecord{iter, lower / scale, upper / scale, gap, elapsed() * 1000.0});
      if (cfg.verbose) warn("iteration " + std::to_string(iter) + ": empty ambiguity set, pattern excluded");
      continue;
    }

    // Evaluate the plan exactly and add one cut per (period, scenario).
    double value = investment_cost(src, plan).total() * scale;
    size_t new_cuts = 0;
    for (int g = 1; g <= src.periods; ++g) {
      const auto& sup = src.support.at(g);
      std::vector<double> V;
      for (size_t s = 0; s < sup.size(); ++s) {
        const SubproblemResult sp = solve_subproblem(*backend, src, plan, g, sup[s], cfg.op);
        V.push_back(sp.value);
        if (r.x[mp.omega[g - 1][s]] < sp.value - 1e-9 * std::max(1.0, std::abs(sp.value))) ++new_cuts;
        BendersCut c;
        c.period = g;
        c.scenario = static_cast<int>(s);
        c.value = sp.value;
        c.at = plan.periods[g - 1];
        c.slope_x = sp.link_slope_x;
        c.slope_z = sp.link_slope_z;
        c.slope_pv = sp.link_slope_pv;
        c.slope_ess = sp.link_slope_ess;
        c.slope_line = sp.link_slope_line;
        cuts.push_back(std::move(c));
      }
      value += inner_max(*backend, ddas[g - 1], h, V).value;
    }
    if (value < upper) {
      upper = value;
      best = plan;
      have_best = true;
    }

    const double gap = std::isfinite(lower) ? (upper - lower) / std::max(std::abs(upper), 1e-12) : kInf;
    rep.log.push_back(IterationRecord{iter, lower / scale, upper / scale, gap, elapsed() * 1000.0});
    if (cfg.verbose)
      warn("iteration " + std::to_string(iter) + ": lower " + std::to_string(lower / scale) + " upper " +
           std::to_string(upper / scale));

    // A master bound above a feasible value means the dual box cut off the
    // true dual optimum; enlarge it and discard the bound.
    const bool crossed = lower > upper + 1e-7 * std::max(1.0, std::abs(upper));
    if ((crossed || (last_at_bound && gap <= cfg.gap_tol)) && rep.m_doublings < cfg.max_m_doublings) {
      M *= 2.0;
      ++rep.m_doublings;
      lower = -kInf;
      warn("dual variable at its McCormick bound; doubling M");
      continue;
    }
    if (gap <= cfg.gap_tol) {
      converged = true;
      break;
    }
    if (new_cuts == 0) {
      // Nothing left to learn at this master precision.
      if (master_gap <= tight_gap) {
        converged = true;
        break;
      }
      master_gap = tight_gap;
    } else {
      master_gap = std::clamp(0.1 * gap, tight_gap, master_gap);
    }
    if (std::isfinite(cfg.time_limit) && elapsed() >= cfg.time_limit) break;
  }

  if (!have_best) throw Error(ErrorKind::IterationLimit, "no master iteration completed");
  rep.plan = best;
  rep.iterations = iter;
  rep.lower_bound = lower / scale;
  rep.upper_bound = upper / scale;
  rep.objective = upper / scale;
  rep.gap = std::isfinite(lower) ? (upper - lower) / std::max(std::abs(upper), 1e-12) : kInf;
  rep.mccormick_M = M;
  rep.dual_at_bound = last_at_bound;
  rep.converged = converged;
  if (!converged) {
    const std::string msg = "iteration or time limit reached with relative gap " + std::to_string(rep.gap) +
                            "; returning the best plan found";
    warn(msg);
    rep.warnings.push_back(msg);
  }
  if (last_at_bound) rep.warnings.push_back("dual variable at its McCormick bound in the last master");
  rep.investment = investment_cost(src, best);
  rep.operation_cost = rep.objective - rep.investment.total();
  const WorstCase wc = worst_case_distribution(*backend, inst, best, mode, false, cfg.op);
  rep.worst_case = wc.delta;
  rep.cuts = std::move(cuts);
  return rep;
}

}  // namespace fcsp
