#include <cmath>

#include "fcsp/error.hpp"
#include "fcsp/solve.hpp"

namespace fcsp {

namespace {

// Per period: min kappa + hi.beta - lo.alpha s.t. kappa + theta_s (beta - alpha)... >= V_s,
// with moment bounds evaluated at the plan. Row duals form the maximizing pi.
void reduced_form(SolverBackend& backend, const DdasPeriod& d, const FcsHistory& h,
                  const std::vector<double>& V, std::vector<double>& delta, double& value) {
  LinearModel m;
  const int kappa = m.add_column("kappa", -kInf, kInf, 1.0);
  struct Pair { int am, bm, av, bv; };
  std::vector<Pair> cols;
  for (size_t od = 0; od < d.rows.size(); ++od) {
    const DdasOdRows& r = d.rows[od];
    const int o = static_cast<int>(od);
    cols.push_back({m.add_column(indexed_name("alpha_mu", {o}), 0, kInf, -r.mean_lo.eval(h)),
                    m.add_column(indexed_name("beta_mu", {o}), 0, kInf, r.mean_hi.eval(h)),
                    m.add_column(indexed_name("alpha_v", {o}), 0, kInf, -r.second_lo.eval(h)),
                    m.add_column(indexed_name("beta_v", {o}), 0, kInf, r.second_hi.eval(h))});
  }
  std::vector<int> rows;
  for (size_t s = 0; s < d.scenarios(); ++s) {
    Terms t{{kappa, 1.0}};
    for (size_t od = 0; od < cols.size(); ++od) {
      const double th = d.support[s][od];
      t.emplace_back(cols[od].bm, th);
      t.emplace_back(cols[od].am, -th);
      t.emplace_back(cols[od].bv, th * th);
      t.emplace_back(cols[od].av, -th * th);
    }
    rows.push_back(m.add_ge(indexed_name("dual_feas", {static_cast<int>(s)}), t, V[s]));
  }
  const SolveResult r = backend.solve(m, SolveOptions{});
  if (r.status == SolveStatus::Unbounded || r.status == SolveStatus::Infeasible)
    throw Error(ErrorKind::EmptyAmbiguitySet,
                "dual of period " + std::to_string(d.period) + " is unbounded; the ambiguity set is empty");
  if (r.status != SolveStatus::Optimal) throw Error(ErrorKind::SolverFailure, "worst-case LP failed");
  if (!r.has_duals) throw Error(ErrorKind::DualUnavailable, "worst-case LP returned no duals");
  delta.clear();
  for (int i : rows) delta.push_back(r.row_dual[i]);
  value = r.objective;
}

}  // namespace

WorstCase worst_case_distribution(SolverBackend& backend, const Instance& inst, const Plan& plan,
                                  PlanningMode mode, bool full, const OperationOptions& op) {
  if (mode == PlanningMode::SDD)
    throw Error(ErrorKind::Config, "sdd plans use fixed probabilities and have no worst case");
  const Instance src = mode == PlanningMode::DIU ? inst.decision_independent() : inst;
  const FcsHistory h = plan.history(src);
  const auto ddas = src.ddas();
  WorstCase wc;

  if (!full) {
    for (int g = 1; g <= src.periods; ++g) {
      std::vector<double> V;
      for (const auto& theta : src.support.at(g))
        V.push_back(solve_subproblem(backend, src, plan, g, theta, op).value);
      std::vector<double> delta;
      double value = 0.0;
      reduced_form(backend, ddas[g - 1], h, V, delta, value);
      wc.delta.push_back(std::move(delta));
      wc.inner_value.push_back(value);
      wc.V.push_back(std::move(V));
    }
    return wc;
  }

  // The products are exact once x is fixed, so any finite M large enough to
  // leave the duals interior gives the same LP; grow until that holds.
  double M = src.options.mccormick_m > 0.0 ? src.options.mccormick_m : default_mccormick_bound(src);
  for (int attempt = 0; attempt < 8; ++attempt, M *= 2.0) {
    ExtensiveModel em = build_extensive(src, PlanningMode::DDU, M, op);
    fix_first_stage(em.model, src, em.fs, plan);
    em.model.relax_integrality();
    const SolveResult r = solve_or_throw(backend, em.model, SolveOptions{}, "fixed-plan worst-case model");
    if (!r.has_duals) throw Error(ErrorKind::DualUnavailable, "fixed-plan model returned no duals");
    bool at_bound = false;
    for (const DualBlock& b : em.duals)
      for (size_t od = 0; od < b.alpha_mu.size(); ++od)
        for (auto [a, c] : {std::pair{b.alpha_mu[od], b.beta_mu[od]}, {b.alpha_v[od], b.beta_v[od]}}) {
          const double common = std::min(r.x[a], r.x[c]);
          if (r.x[a] - common >= M - 1e-6 || r.x[c] - common >= M - 1e-6) at_bound = true;
        }
    if (at_bound) continue;
    wc = WorstCase{};
    for (size_t g = 0; g < em.dual_rows.size(); ++g) {
      std::vector<double> delta, V;
      double value = 0.0;
      for (size_t s = 0; s < em.dual_rows[g].size(); ++s) {
        delta.push_back(r.row_dual[em.dual_rows[g][s]]);
        double v = 0.0;
        for (const auto& [j, c] : em.scenario_cost[g][s]) v += c * r.x[j];
        V.push_back(v);
        value += delta.back() * v;
      }
      wc.delta.push_back(std::move(delta));
      wc.V.push_back(std::move(V));
      wc.inner_value.push_back(value);
    }
    return wc;
  }
  throw Error(ErrorKind::UnboundedDuals, "ambiguity-set duals stay at their bound; the set may be empty");
}

}  // namespace fcsp
