#include "oracle.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

using namespace fcsp;

std::vector<std::set<NodeId>> coverage_by_simulation(const TransportNetwork& tn, const OdPair& od, double range) {
  // Positions around the cycle origin -> destination -> origin.
  std::vector<NodeId> seq = od.path_nodes;
  for (size_t i = od.path_nodes.size() - 1; i-- > 0;) seq.push_back(od.path_nodes[i]);
  std::vector<double> at(seq.size(), 0.0);
  for (size_t p = 1; p < seq.size(); ++p) at[p] = at[p - 1] + *tn.arc_length(seq[p - 1], seq[p]);
  const double loop = at.back();
  const size_t arcs = seq.size() - 1;

  std::vector<std::set<NodeId>> out(arcs);
  for (size_t m = 0; m < arcs; ++m) {
    const double end = at[m + 1];
    for (size_t p = 0; p < arcs; ++p) {  // position arcs == position 0
      const NodeId i = seq[p];
      if (!tn.is_candidate(i)) continue;
      // Distance driven since the most recent visit strictly before `end`.
      double d = end - at[p];
      if (d <= 0.0) d += loop;
      if (d <= range + 1e-9) out[m].insert(i);
    }
  }
  return out;
}

namespace {

struct CandidateOption {
  std::vector<int> x, z;
};

}  // namespace

std::vector<Plan> enumerate_plans(const Instance& inst) {
  const int G = inst.periods;
  const int zmin = static_cast<int>(std::ceil(inst.tech.z_min - 1e-9));
  const int zmax = static_cast<int>(std::floor(inst.tech.z_max + 1e-9));
  // Monotone (x, z) trajectories of a single candidate.
  std::vector<CandidateOption> options{{std::vector<int>(G, 0), std::vector<int>(G, 0)}};
  for (int g = 0; g < G; ++g) {
    std::vector<CandidateOption> next;
    for (const auto& o : options) {
      const int px = g ? o.x[g - 1] : 0, pz = g ? o.z[g - 1] : 0;
      for (int x = px; x <= 1; ++x)
        for (int z = std::max(pz, x * zmin); z <= x * zmax; ++z) {
          if (x == 0 && z != 0) continue;
          CandidateOption n = o;
          n.x[g] = x;
          n.z[g] = z;
          next.push_back(n);
        }
    }
    options = next;
  }
  std::vector<std::vector<int>> line_options{std::vector<int>(G, 0)};
  for (int g = 0; g < G; ++g) {
    std::vector<std::vector<int>> next;
    for (const auto& o : line_options)
      for (int v = g ? o[g - 1] : 0; v <= 1; ++v) {
        auto n = o;
        n[g] = v;
        next.push_back(n);
      }
    line_options = next;
  }

  const size_t nc = inst.candidates.size(), nl = inst.lines.size();
  std::vector<Plan> out;
  std::vector<size_t> pick(nc, 0), lpick(nl, 0);
  while (true) {
    Plan p = empty_plan(inst);
    for (size_t c = 0; c < nc; ++c) {
      double sub = inst.coupling.initial_substation(inst.candidates[c]);
      for (int g = 0; g < G; ++g) {
        p.periods[g].x[c] = options[pick[c]].x[g];
        p.periods[g].z[c] = options[pick[c]].z[g];
        sub = std::max(sub, inst.tech.p_cs_kw / 1000.0 * p.periods[g].z[c]);
        p.periods[g].sub_mw[c] = sub;
      }
    }
    for (size_t l = 0; l < nl; ++l)
      for (int g = 0; g < G; ++g) p.periods[g].line[l] = line_options[lpick[l]][g];
    if (first_stage_violation(inst, p).empty()) out.push_back(p);

    // Odometer over candidate and line choices.
    size_t k = 0;
    for (; k < nc; ++k) {
      if (++pick[k] < options.size()) break;
      pick[k] = 0;
    }
    if (k < nc) continue;
    size_t l = 0;
    for (; l < nl; ++l) {
      if (++lpick[l] < line_options.size()) break;
      lpick[l] = 0;
    }
    if (l == nl) break;
  }
  return out;
}

std::vector<size_t> Enumeration::ties(double rel_tol) const {
  std::vector<size_t> out;
  const double b = best_value();
  for (size_t i = 0; i < values.size(); ++i)
    if (values[i] <= b + rel_tol * std::max(1.0, std::abs(b))) out.push_back(i);
  return out;
}

Enumeration enumerate(SolverBackend& backend, const Instance& base, PlanningMode mode,
                      const std::vector<std::vector<double>>* probabilities) {
  const Instance inst = mode == PlanningMode::DIU ? base.decision_independent() : base;
  const double scale = inst.options.cost_scale;
  const auto ddas = inst.ddas();
  Enumeration e;
  e.plans = enumerate_plans(inst);
  std::map<std::tuple<int, size_t, std::vector<int>, std::vector<int>, std::vector<int>>, double> cache;
  for (const Plan& p : e.plans) {
    double value = investment_cost(inst, p).total() * scale;
    const FcsHistory h = p.history(inst);
    for (int g = 1; g <= inst.periods; ++g) {
      const PeriodPlan& pp = p.periods[g - 1];
      std::vector<double> V;
      const auto& sup = inst.support.at(g);
      for (size_t s = 0; s < sup.size(); ++s) {
        std::vector<double> theta = sup[s];
        if (mode == PlanningMode::SDD)
          for (size_t od = 0; od < theta.size(); ++od)
            for (const XTerm& t : inst.coeffs.at(od, g).expected.terms)
              if (h[t.period].count(t.node)) theta[od] += t.coef;
        const auto key = std::make_tuple(g, s, pp.x, pp.z, pp.line);
        auto it = mode == PlanningMode::SDD ? cache.end() : cache.find(key);
        double v;
        if (it != cache.end()) {
          v = it->second;
        } else {
          v = solve_subproblem(backend, inst, p, g, theta).value;
          if (mode != PlanningMode::SDD) cache.emplace(key, v);
        }
        V.push_back(v);
      }
      if (mode == PlanningMode::SDD) {
        for (size_t s = 0; s < V.size(); ++s) value += (*probabilities)[g - 1][s] * V[s];
      } else {
        value += inner_max(backend, ddas[g - 1], h, V).value;
      }
    }
    e.values.push_back(value);
  }
  e.best = static_cast<size_t>(std::min_element(e.values.begin(), e.values.end()) - e.values.begin());
  return e;
}

std::vector<double> logistic_adoption(const OdDiffusion& p, const std::vector<std::set<NodeId>>& open) {
  std::vector<double> theta{p.theta0};
  for (size_t g = 1; g <= p.a.size(); ++g) {
    double d = 1.0;
    for (const auto& [n, v] : p.delta_d)
      if (open[g - 1].count(n)) d += v;
    const double prev = theta.back();
    theta.push_back(prev + p.a[g - 1] * d * (1.0 - prev / p.K));
  }
  return theta;
}

Plan random_plan(const Instance& inst, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Plan p = empty_plan(inst);
    for (size_t c = 0; c < inst.candidates.size(); ++c) {
      const NodeId n = inst.candidates[c];
      const int open_at = static_cast<int>(u(rng) * (inst.periods + 1));  // periods means never
      double sub = inst.coupling.initial_substation(n), pv = 0.0, ess = 0.0;
      int z = 0;
      for (int g = 0; g < inst.periods; ++g) {
        PeriodPlan& pp = p.periods[g];
        pp.x[c] = g >= open_at ? 1 : 0;
        if (pp.x[c]) {
          const int lo = std::max(z, static_cast<int>(std::ceil(inst.tech.z_min)));
          const int hi = static_cast<int>(inst.tech.z_max);
          z = lo + static_cast<int>(u(rng) * (hi - lo + 1));
          z = std::min(z, hi);
          if (inst.options.pv) pv = std::max(pv, u(rng) * inst.tech.pv_max(n));
          if (inst.options.ess) ess = std::max(ess, u(rng) * inst.tech.ess_max(n));
        }
        pp.z[c] = z;
        pp.pv_mw[c] = pv;
        pp.ess_mwh[c] = ess;
        sub = std::max(sub, inst.tech.p_cs_kw / 1000.0 * z) + (u(rng) < 0.2 ? u(rng) * 0.2 : 0.0);
        pp.sub_mw[c] = sub;
      }
    }
    for (size_t l = 0; l < inst.lines.size(); ++l) {
      const int at = static_cast<int>(u(rng) * (inst.periods + 1));
      for (int g = 0; g < inst.periods; ++g) p.periods[g].line[l] = g >= at ? 1 : 0;
    }
    if (first_stage_violation(inst, p).empty()) return p;
  }
  throw std::runtime_error("no feasible random plan found");
}

}  // namespace oracle
