#include "fcsp/evaluate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fcsp/error.hpp"
#include "fcsp/log.hpp"

namespace fcsp {

const char* to_string(TestKind k) {
  switch (k) {
    case TestKind::WCD: return "wcd";
    case TestKind::RGD: return "rgd";
    case TestKind::ED: return "ed";
  }
  return "?";
}

TestKind parse_test_kind(const std::string& text) {
  if (text == "wcd") return TestKind::WCD;
  if (text == "rgd") return TestKind::RGD;
  if (text == "ed") return TestKind::ED;
  throw Error(ErrorKind::Config, "unknown test set '" + text + "' (expected wcd, rgd or ed)");
}

void TestSet::validate(const Instance& inst) const {
  if (static_cast<int>(probabilities.size()) != inst.periods)
    throw Error(ErrorKind::InvalidParams, "test set needs one distribution per period");
  for (int g = 1; g <= inst.periods; ++g) {
    const auto& p = probabilities[g - 1];
    if (p.size() != inst.support.at(g).size())
      throw Error(ErrorKind::InvalidParams, "test set size differs from the support in period " + std::to_string(g));
    double sum = 0.0;
    for (double v : p) {
      if (!std::isfinite(v) || v < -1e-9) throw Error(ErrorKind::InvalidParams, "negative or non-finite probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw Error(ErrorKind::InvalidParams, "probabilities do not sum to one");
  }
}

namespace {

std::vector<double> clean(std::vector<double> p) {
  double sum = 0.0;
  for (double& v : p) {
    v = std::max(v, 0.0);
    sum += v;
  }
  if (sum > 0.0)
    for (double& v : p) v /= sum;
  return p;
}

std::vector<double> dirichlet(std::mt19937_64& rng, size_t n) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& v : w) {
    v = gamma(rng);
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

int distinct_set_count(const Instance& inst, size_t od) {
  std::set<std::vector<NodeId>> seen;
  for (const CoverageEntry& e : inst.coverage.at(od)) {
    std::vector<NodeId> s;
    for (NodeId n : e.nodes)
      if (inst.candidate_index(n) >= 0) s.push_back(n);
    seen.insert(s);
  }
  return static_cast<int>(seen.size());
}

}  // namespace

TestSet worst_case_test_set(SolverBackend& backend, const Instance& inst, const Plan& plan,
                            const OperationOptions& op) {
  const WorstCase wc = worst_case_distribution(backend, inst, plan, PlanningMode::DDU, false, op);
  TestSet t;
  t.kind = TestKind::WCD;
  for (const auto& d : wc.delta) t.probabilities.push_back(clean(d));
  return t;
}

std::vector<TestSet> random_test_sets(SolverBackend& backend, const Instance& inst, const Plan& plan,
                                      int count, std::uint64_t seed, int max_rejections) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const FcsHistory h = plan.history(inst);
  const auto ddas = inst.ddas();
  std::vector<TestSet> out(count);
  for (int k = 0; k < count; ++k) {
    out[k].kind = TestKind::RGD;
    out[k].seed = seed;
  }
  for (int g = 1; g <= inst.periods; ++g) {
    const DdasPeriod& d = ddas[g - 1];
    const size_t S = d.scenarios();
    std::vector<std::vector<double>> vertices;
    for (int k = 0; k < count; ++k) {
      std::vector<double> p;
      for (int tries = 0; tries < max_rejections; ++tries) {
        auto w = dirichlet(rng, S);
        if (ddas_violation(d, h, w) <= 1e-9) {
          p = std::move(w);
          break;
        }
      }
      if (p.empty()) {
        // Rejection keeps failing for tight sets; mix extreme points instead.
        if (vertices.empty()) {
          std::set<std::vector<double>> seen;
          for (size_t v = 0; v < 2 * S + 2; ++v) {
            std::vector<double> c(S);
            for (double& x : c) x = normal(rng);
            auto pi = clean(inner_max(backend, d, h, c).pi);
            std::vector<double> key(pi.size());
            for (size_t i = 0; i < pi.size(); ++i) key[i] = std::round(pi[i] * 1e9) / 1e9;
            if (seen.insert(key).second) vertices.push_back(std::move(pi));
          }
        }
        const auto w = dirichlet(rng, vertices.size());
        p.assign(S, 0.0);
        for (size_t v = 0; v < vertices.size(); ++v)
          for (size_t s = 0; s < S; ++s) p[s] += w[v] * vertices[v][s];
        out[k].fallback = true;
      }
      out[k].probabilities.push_back(clean(std::move(p)));
    }
  }
  if (count > 0 && out[0].fallback) warn("random test distributions built from mixtures of extreme points");
  return out;
}

TestSet empirical_test_set(const Instance& inst, const Plan& plan) {
  const FcsHistory h = plan.history(inst);
  TestSet t;
  t.kind = TestKind::ED;
  const size_t nq = inst.ods.size();
  for (int g = 1; g <= inst.periods; ++g) {
    const auto& sup = inst.support.at(g);
    const size_t S = sup.size();
    const size_t k = 2 * nq;
    Eigen::MatrixXd F(S, k);
    Eigen::VectorXd target(k);
    for (size_t od = 0; od < nq; ++od) {
      const double mu = expected_adoption(inst.coeffs, inst.diffusion, od, g, h);
      const double sigma = inst.diffusion.ods[od].sigma.at(g - 1);
      target(2 * od) = mu;
      target(2 * od + 1) = mu * mu + sigma * sigma;
      for (size_t s = 0; s < S; ++s) {
        F(s, 2 * od) = sup[s][od];
        F(s, 2 * od + 1) = sup[s][od] * sup[s][od];
      }
    }
    // Centre each moment column on its target and scale it to unit spread
    // so the ridge below does not bias small-valued moments.
    for (size_t j = 0; j < k; ++j) {
      Eigen::VectorXd col = F.col(j).array() - target(j);
      const double spread = std::sqrt((F.col(j).array() - F.col(j).mean()).square().mean());
      F.col(j) = col / std::max(spread, 1e-12);
    }
    target.setZero();
    // Dual of min KL(p || uniform) s.t. F' p = target, with a small ridge so
    // unreachable moments give the closest reachable fit.
    const double ridge = 1e-10;
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(k);
    auto probs = [&](const Eigen::VectorXd& l) {
      Eigen::VectorXd z = F * l;
      const double zmax = z.maxCoeff();
      Eigen::VectorXd p = (z.array() - zmax).exp();
      return Eigen::VectorXd(p / p.sum());
    };
    auto dual = [&](const Eigen::VectorXd& l) {
      Eigen::VectorXd z = F * l;
      const double zmax = z.maxCoeff();
      return zmax + std::log((z.array() - zmax).exp().sum()) - l.dot(target) + 0.5 * ridge * l.squaredNorm();
    };
    for (int it = 0; it < 200; ++it) {
      const Eigen::VectorXd p = probs(lam);
      const Eigen::VectorXd mean = F.transpose() * p;
      const Eigen::VectorXd grad = mean - target + ridge * lam;
      if (grad.norm() < 1e-12) break;
      Eigen::MatrixXd H = F.transpose() * p.asDiagonal() * F - mean * mean.transpose();
      H.diagonal().array() += ridge;
      const Eigen::VectorXd step = H.ldlt().solve(-grad);
      double a = 1.0;
      const double f0 = dual(lam);
      while (a > 1e-12 && dual(lam + a * step) > f0 + 1e-4 * a * grad.dot(step)) a *= 0.5;
      lam += a * step;
    }
    const Eigen::VectorXd p = probs(lam);
    t.probabilities.emplace_back(p.data(), p.data() + p.size());
  }
  return t;
}

EvaluationReport simulate_plan(SolverBackend& backend, const Instance& inst, const Plan& plan,
                               const TestSet& test, const SimulateOptions& opt) {
  test.validate(inst);
  if (!opt.allow_stranded) {
    const std::string bad = first_stage_violation(inst, plan);
    if (!bad.empty()) throw Error(ErrorKind::InvalidParams, "plan violates first-stage constraints: " + bad);
  }
  OperationOptions op;
  op.relax_limits = opt.relax_limits;
  op.allow_stranded = opt.allow_stranded;

  const double scale = inst.options.cost_scale;
  const size_t nn = inst.dn.nodes().size();
  const size_t nl = inst.dn.lines().size();
  std::vector<int> nsets;
  for (size_t od = 0; od < inst.ods.size(); ++od) nsets.push_back(distinct_set_count(inst, od));

  EvaluationReport rep;
  rep.kind = test.kind;
  rep.relax_limits = opt.relax_limits;
  rep.v_min.assign(nn, kInf);
  rep.v_max.assign(nn, -kInf);
  rep.loading_max.assign(nl, 0.0);
  if (opt.slice) {
    rep.slice = *opt.slice;
    rep.slice->voltage.assign(nn, 0.0);
    rep.slice->loading.assign(nl, 0.0);
  }
  double covered_all = 0.0, demand_all = 0.0;

  for (int g = 1; g <= inst.periods; ++g) {
    const auto& sup = inst.support.at(g);
    const auto& days = inst.days.at(g - 1);
    const PeriodPlan& pp = plan.periods.at(g - 1);
    double wsum = 0.0;
    for (const auto& d : days) wsum += d.weight;
    rep.hours.emplace_back(days.size(), std::vector<HourStat>(kHours));
    double shed = 0.0, cost = 0.0;
    for (size_t s = 0; s < sup.size(); ++s) {
      const double pi = test.probabilities[g - 1][s];
      if (pi <= 1e-12) continue;
      SubproblemModel sp;
      const SubproblemResult r = solve_subproblem(backend, inst, plan, g, sup[s], op, &sp);
      cost += pi * r.value / scale;
      for (size_t d = 0; d < days.size(); ++d) {
        const OperationBlock& b = sp.blocks[d];
        const double dw = wsum > 0.0 ? days[d].weight / wsum : 0.0;
        for (int t = 0; t < kHours; ++t) {
          double covered = 0.0, uncovered = 0.0;
          for (size_t ci = 0; ci < inst.candidates.size(); ++ci) {
            covered += r.x[b.lambda[ci][t]];
            uncovered += r.x[b.lambda_un[ci][t]];
          }
          for (size_t od = 0; od < inst.ods.size(); ++od)
            if (b.stranded[od][t] >= 0) uncovered += r.x[b.stranded[od][t]] * b.ev_flow[od][t] * nsets[od];
          HourStat& hs = rep.hours[g - 1][d][t];
          hs.covered += pi * covered;
          hs.demand += pi * (covered + uncovered);
          covered_all += pi * days[d].weight * covered;
          demand_all += pi * days[d].weight * (covered + uncovered);

          for (size_t k = 0; k < nn; ++k) {
            shed += pi * dw * r.x[b.zeta[k][t]] * std::max(inst.p_load(static_cast<int>(k), days[d], t), 0.0) *
                    1000.0 * inst.tech.dt_h;
            const double v = std::sqrt(std::max(r.x[b.u[k][t]], 0.0));
            rep.v_min[k] = std::min(rep.v_min[k], v);
            rep.v_max[k] = std::max(rep.v_max[k], v);
            if (rep.slice && rep.slice->period == g && rep.slice->day == static_cast<int>(d) &&
                rep.slice->hour == t + 1)
              rep.slice->voltage[k] += pi * v;
          }
          for (size_t e = 0; e < nl; ++e) {
            const DnLine& line = inst.dn.lines()[e];
            double pcap = line.p_max_mw, qcap = line.q_max_mvar;
            const auto it = std::find(inst.lines.begin(), inst.lines.end(), static_cast<int>(e));
            if (it != inst.lines.end() && pp.line[it - inst.lines.begin()]) {
              pcap += line.p_expansion_mw;
              qcap += line.q_expansion_mvar;
            }
            double load = 0.0;
            if (pcap > 0.0) load = std::max(load, std::abs(r.x[b.p_line[e][t]]) / pcap);
            if (qcap > 0.0) load = std::max(load, std::abs(r.x[b.q_line[e][t]]) / qcap);
            rep.loading_max[e] = std::max(rep.loading_max[e], load);
            if (rep.slice && rep.slice->period == g && rep.slice->day == static_cast<int>(d) &&
                rep.slice->hour == t + 1)
              rep.slice->loading[e] += pi * load;
          }
        }
      }
    }
    for (auto& day : rep.hours[g - 1])
      for (HourStat& hs : day) hs.covered_fraction = hs.demand > 1e-12 ? std::clamp(hs.covered / hs.demand, 0.0, 1.0) : 1.0;
    rep.shedding_kwh_per_day.push_back(shed);
    rep.operation_cost.push_back(cost);
    rep.total_operation_cost += cost;
  }
  rep.covered_fraction = demand_all > 1e-12 ? std::clamp(covered_all / demand_all, 0.0, 1.0) : 1.0;
  rep.trajectory = diffusion_trajectory(inst, plan);
  return rep;
}

double vd3rs_of_plans(SolverBackend& backend, const Instance& inst, const Plan& ddu_plan,
                      const Plan& diu_plan, const OperationOptions& op) {
  const double f_star = evaluate_plan_objective(backend, inst, ddu_plan, PlanningMode::DDU, op).total;
  const double f_diu = evaluate_plan_objective(backend, inst, diu_plan, PlanningMode::DDU, op).total;
  return (f_diu - f_star) / f_star;
}

Vd3rsResult vd3rs(const Instance& inst, const SolveConfig& cfg, const std::string& method) {
  auto solve = [&](PlanningMode mode) {
    if (method == "benders") return solve_benders(inst, mode, cfg);
    if (method == "extensive") return solve_extensive(inst, mode, cfg);
    throw Error(ErrorKind::Config, "unknown method '" + method + "'");
  };
  Vd3rsResult out;
  out.ddu = solve(PlanningMode::DDU);
  out.diu = solve(PlanningMode::DIU);
  out.ddu_plan = out.ddu.plan;
  out.diu_plan = out.diu.plan;
  auto backend = make_backend(cfg.backend);
  const double scale = inst.options.cost_scale;
  out.f_ddu = evaluate_plan_objective(*backend, inst, out.ddu_plan, PlanningMode::DDU, cfg.op).total;
  out.f_diu_plan = out.ddu_plan == out.diu_plan
                       ? out.f_ddu
                       : evaluate_plan_objective(*backend, inst, out.diu_plan, PlanningMode::DDU, cfg.op).total;
  out.value = (out.f_diu_plan - out.f_ddu) / out.f_ddu;
  out.f_ddu /= scale;
  out.f_diu_plan /= scale;
  return out;
}

std::vector<std::vector<double>> diffusion_trajectory(const Instance& inst, const Plan& plan) {
  const FcsHistory h = plan.history(inst);
  std::vector<std::vector<double>> out(inst.ods.size());
  for (size_t od = 0; od < inst.ods.size(); ++od)
    for (int g = 1; g <= inst.periods; ++g)
      out[od].push_back(expected_adoption(inst.coeffs, inst.diffusion, od, g, h));
  return out;
}

}  // namespace fcsp
