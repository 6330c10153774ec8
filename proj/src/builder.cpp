#include "fcsp/builder.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fcsp/error.hpp"

namespace fcsp {

namespace {

constexpr int kNone = -1;

HourIndex none_hours() {
  HourIndex h;
  h.fill(kNone);
  return h;
}

bool has_pv(const Instance& inst, NodeId n) {
  return inst.options.pv && inst.tech.pv_max(n) > 0.0;
}

bool has_ess(const Instance& inst, NodeId n) {
  return inst.options.ess && inst.tech.ess_max(n) > 0.0;
}

// Distinct cover sets (as candidate positions) of one OD pair.
std::vector<std::vector<int>> distinct_cover_sets(const Instance& inst, size_t od) {
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> out;
  for (const CoverageEntry& e : inst.coverage.at(od)) {
    std::vector<int> set;
    for (NodeId n : e.nodes) {
      int c = inst.candidate_index(n);
      if (c >= 0) set.push_back(c);
    }
    if (set.empty()) throw Error(ErrorKind::InfeasibleCoverage, "empty cover set on OD " + inst.ods[od].key());
    if (seen.insert(set).second) out.push_back(set);
  }
  return out;
}

double max_theta(const Instance& inst, size_t od, int period) {
  double m = 0.0;
  for (const auto& s : inst.support.at(period)) m = std::max(m, s.at(od));
  return m;
}

}  // namespace

const char* to_string(PlanningMode mode) {
  switch (mode) {
    case PlanningMode::DDU: return "ddu";
    case PlanningMode::DIU: return "diu";
    case PlanningMode::SDD: return "sdd";
  }
  return "?";
}

PlanningMode parse_mode(const std::string& text) {
  if (text == "ddu") return PlanningMode::DDU;
  if (text == "diu") return PlanningMode::DIU;
  if (text == "sdd") return PlanningMode::SDD;
  throw Error(ErrorKind::Config, "unknown mode '" + text + "' (expected ddu, diu or sdd)");
}

StageLink stage_link(const FirstStage& fs, int period) {
  StageLink l;
  const int g = period - 1;
  for (size_t c = 0; c < fs.x.size(); ++c) {
    l.x.push_back(fs.x[c][g]);
    l.z.push_back(fs.z[c][g]);
    l.pv.push_back(fs.pv[c][g]);
    l.ess.push_back(fs.ess[c][g]);
  }
  for (const auto& line : fs.line) l.line.push_back(line[g]);
  return l;
}

FirstStage build_first_stage(LinearModel& m, VariableRegistry& reg, const Instance& inst) {
  const int G = inst.periods;
  const size_t nc = inst.candidates.size();
  const CostParams& c = inst.cost;
  const TechParams& t = inst.tech;
  const double scale = inst.options.cost_scale;
  const double crf_fcs = capital_recovery_factor(c.interest, c.life_fcs);
  const double crf_cs = capital_recovery_factor(c.interest, c.life_cs);
  const double crf_pv = capital_recovery_factor(c.interest, c.life_pv);
  const double crf_ess = capital_recovery_factor(c.interest, c.life_ess);
  const double crf_line = capital_recovery_factor(c.interest, c.life_line);
  const double crf_sub = capital_recovery_factor(c.interest, c.life_sub);

  FirstStage fs;
  auto grid = [&](size_t n) { return std::vector<std::vector<int>>(n, std::vector<int>(G, kNone)); };
  fs.x = grid(nc); fs.x_new = grid(nc); fs.z = grid(nc); fs.z_new = grid(nc);
  fs.pv = grid(nc); fs.pv_new = grid(nc); fs.ess = grid(nc); fs.ess_new = grid(nc);
  fs.sub = grid(nc); fs.sub_new = grid(nc);
  fs.line = grid(inst.lines.size()); fs.line_new = grid(inst.lines.size());

  for (size_t ci = 0; ci < nc; ++ci) {
    const NodeId n = inst.candidates[ci];
    for (int g = 1; g <= G; ++g) {
      const double f = inst.investment_factor(g) * scale;
      fs.x[ci][g - 1] = reg.add(m, "x_ch", {n, g}, 0, 1, 0, VarType::Binary);
      fs.x_new[ci][g - 1] = reg.add(m, "x_ch_new", {n, g}, 0, 1, f * crf_fcs * c.fcs);
      fs.z[ci][g - 1] = reg.add(m, "z_ch", {n, g}, 0, t.z_max, 0, VarType::Integer);
      fs.z_new[ci][g - 1] = reg.add(m, "z_ch_new", {n, g}, 0, t.z_max, f * crf_cs * c.cs);
      if (has_pv(inst, n)) {
        fs.pv[ci][g - 1] = reg.add(m, "P_re", {n, g}, 0, t.pv_max(n));
        fs.pv_new[ci][g - 1] = reg.add(m, "P_re_new", {n, g}, 0, kInf, f * crf_pv * c.pv * 1000.0);
      }
      if (has_ess(inst, n)) {
        fs.ess[ci][g - 1] = reg.add(m, "E_es", {n, g}, 0, t.ess_max(n));
        fs.ess_new[ci][g - 1] = reg.add(m, "E_es_new", {n, g}, 0, kInf, f * crf_ess * c.ess * 1000.0);
      }
      fs.sub[ci][g - 1] = reg.add(m, "P_sub", {n, g}, 0, kInf);
      fs.sub_new[ci][g - 1] = reg.add(m, "P_sub_new", {n, g}, 0, kInf, f * crf_sub * c.sub * 1000.0);
    }
    for (int g = 1; g <= G; ++g) {
      const int x = fs.x[ci][g - 1], z = fs.z[ci][g - 1];
      const std::string k = indexed_name("", {n, g});
      if (g >= 2) {
        const int xp = fs.x[ci][g - 2];
        m.add_ge("x_keep" + k, {{x, 1}, {xp, -1}}, 0, "fcs_sequence");
        m.add_ge("x_add" + k, {{fs.x_new[ci][g - 1], 1}, {x, -1}, {xp, 1}}, 0, "fcs_addition");
        m.add_ge("z_keep" + k, {{z, 1}, {fs.z[ci][g - 2], -1}}, 0, "cs_sequence");
        m.add_eq("z_add" + k, {{fs.z_new[ci][g - 1], 1}, {z, -1}, {fs.z[ci][g - 2], 1}}, 0, "cs_addition");
      } else {
        m.add_ge("x_add" + k, {{fs.x_new[ci][0], 1}, {x, -1}}, 0, "fcs_addition");
        m.add_eq("z_add" + k, {{fs.z_new[ci][0], 1}, {z, -1}}, 0, "cs_addition");
      }
      m.add_ge("z_min" + k, {{z, 1}, {x, -t.z_min}}, 0, "cs_count");
      m.add_le("z_max" + k, {{z, 1}, {x, -t.z_max}}, 0, "cs_count");
      auto cumulative = [&](const std::vector<std::vector<int>>& stock,
                            const std::vector<std::vector<int>>& added, const char* name, double cap) {
        if (stock[ci][g - 1] == kNone) return;
        Terms row{{stock[ci][g - 1], 1}, {added[ci][g - 1], -1}};
        if (g >= 2) row.emplace_back(stock[ci][g - 2], -1);
        m.add_eq(std::string(name) + "_add" + k, row, 0, "der_capacity");
        m.add_le(std::string(name) + "_max" + k, {{stock[ci][g - 1], 1}, {x, -cap}}, 0, "der_limit");
      };
      cumulative(fs.pv, fs.pv_new, "pv", t.pv_max(n));
      cumulative(fs.ess, fs.ess_new, "ess", t.ess_max(n));
      Terms sub_row{{fs.sub[ci][g - 1], 1}, {fs.sub_new[ci][g - 1], -1}};
      if (g >= 2) sub_row.emplace_back(fs.sub[ci][g - 2], -1);
      m.add_eq("sub_add" + k, sub_row, g >= 2 ? 0.0 : inst.coupling.initial_substation(n), "substation");
      m.add_ge("sub_cap" + k, {{fs.sub[ci][g - 1], 1}, {z, -t.p_cs_kw / 1000.0}}, 0, "substation");
    }
  }

  for (size_t li = 0; li < inst.lines.size(); ++li) {
    const DnLine& line = inst.dn.lines()[inst.lines[li]];
    for (int g = 1; g <= G; ++g) {
      const double f = inst.investment_factor(g) * scale;
      const double unit = f * crf_line * c.line * line.length_km * line.p_expansion_mw * 1000.0;
      fs.line[li][g - 1] = reg.add(m, "x_L", {line.from, line.to, g}, 0, 1, 0, VarType::Binary);
      fs.line_new[li][g - 1] = reg.add(m, "x_L_new", {line.from, line.to, g}, 0, 1, unit);
      const std::string k = indexed_name("", {line.from, line.to, g});
      if (g >= 2) {
        m.add_ge("xL_keep" + k, {{fs.line[li][g - 1], 1}, {fs.line[li][g - 2], -1}}, 0, "line_sequence");
        m.add_ge("xL_add" + k, {{fs.line_new[li][g - 1], 1}, {fs.line[li][g - 1], -1}, {fs.line[li][g - 2], 1}},
                 0, "line_addition");
      } else {
        m.add_ge("xL_add" + k, {{fs.line_new[li][0], 1}, {fs.line[li][0], -1}}, 0, "line_addition");
      }
    }
  }

  for (size_t od = 0; od < inst.ods.size(); ++od) {
    const auto sets = distinct_cover_sets(inst, od);
    for (int g = 1; g <= G; ++g) {
      for (size_t k = 0; k < sets.size(); ++k) {
        Terms row;
        for (int ci : sets[k]) row.emplace_back(fs.x[ci][g - 1], 1.0);
        std::ostringstream name;
        name << "cover(" << inst.ods[od].key() << "," << k << "," << g << ")";
        m.add_ge(name.str(), row, 1.0, "coverage");
      }
    }
  }
  return fs;
}

StageLink add_fixed_link(LinearModel& m, VariableRegistry& reg, const Instance& inst,
                         const Plan& plan, int period) {
  const PeriodPlan& pp = plan.periods.at(period - 1);
  StageLink l;
  for (size_t ci = 0; ci < inst.candidates.size(); ++ci) {
    const NodeId n = inst.candidates[ci];
    l.x.push_back(reg.add(m, "x_ch", {n, period}, pp.x[ci], pp.x[ci]));
    l.z.push_back(reg.add(m, "z_ch", {n, period}, pp.z[ci], pp.z[ci]));
    l.pv.push_back(has_pv(inst, n) ? reg.add(m, "P_re", {n, period}, pp.pv_mw[ci], pp.pv_mw[ci]) : kNone);
    l.ess.push_back(has_ess(inst, n) ? reg.add(m, "E_es", {n, period}, pp.ess_mwh[ci], pp.ess_mwh[ci]) : kNone);
  }
  for (size_t li = 0; li < inst.lines.size(); ++li) {
    const DnLine& line = inst.dn.lines()[inst.lines[li]];
    l.line.push_back(reg.add(m, "x_L", {line.from, line.to, period}, pp.line[li], pp.line[li]));
  }
  return l;
}

void mccormick_rows(LinearModel& m, int nu, int alpha, int x, double M, const std::string& name) {
  if (!(M > 0.0) || !std::isfinite(M)) throw Error(ErrorKind::UnboundedDuals, "McCormick bound must be finite and positive");
  m.add_le(name + "_mc1", {{nu, 1}, {x, -M}}, 0, "mccormick");
  m.add_le(name + "_mc2", {{nu, 1}, {alpha, -1}}, 0, "mccormick");
  m.add_ge(name + "_mc3", {{nu, 1}, {alpha, -1}, {x, -M}}, -M, "mccormick");
  m.set_bounds(nu, std::max(m.col(nu).lb, 0.0), m.col(nu).ub);
}

OperationBlock add_operation_block(LinearModel& m, VariableRegistry& reg, const Instance& inst,
                                   int period, int scenario, const std::vector<double>& theta,
                                   int day, const StageLink& link, const OperationOptions& opt,
                                   const SddShift* shift) {
  const RepresentativeDay& rd = inst.days.at(period - 1).at(day);
  const TechParams& tech = inst.tech;
  const CostParams& cost = inst.cost;
  const DistributionNetwork& dn = inst.dn;
  const size_t nc = inst.candidates.size();
  const size_t nq = inst.ods.size();
  const size_t nn = dn.nodes().size();
  const size_t nl = dn.lines().size();
  const double dt = tech.dt_h;
  const double w = rd.weight * inst.operation_factor(period) * inst.options.cost_scale;
  const double e_ev = tech.ev_energy_kwh();
  const ServiceCurve& g = tech.service_curve();
  const int dn_root = dn.node_index(dn.root());

  OperationBlock b;
  b.fr.assign(nq, std::vector<HourIndex>(nc, none_hours()));
  b.lambda.assign(nc, none_hours());
  b.lambda_un.assign(nc, none_hours());
  b.stranded.assign(nq, none_hours());
  b.zeta.assign(nn, none_hours());
  b.u.assign(nn, none_hours());
  b.p_ch.assign(nn, none_hours());
  b.p_line.assign(nl, none_hours());
  b.q_line.assign(nl, none_hours());
  b.p_up = none_hours();
  b.q_up = none_hours();
  b.p_re.assign(nc, none_hours());
  b.p_cu.assign(nc, none_hours());
  b.p_esc.assign(nc, none_hours());
  b.p_esd.assign(nc, none_hours());
  b.e_es.assign(nc, none_hours());
  b.demand_rows.assign(nc, none_hours());
  b.ev_flow.assign(nq, {});

  std::vector<std::vector<std::vector<int>>> sets(nq);
  for (size_t od = 0; od < nq; ++od) sets[od] = distinct_cover_sets(inst, od);

  // Candidate positions attached to each DN node, and line position of each expandable line.
  std::vector<std::vector<int>> at_dn(nn);
  for (size_t ci = 0; ci < nc; ++ci)
    at_dn[dn.node_index(inst.coupling.dn_of(inst.candidates[ci]))].push_back(static_cast<int>(ci));
  std::vector<int> expand_pos(nl, kNone);
  for (size_t li = 0; li < inst.lines.size(); ++li) expand_pos[inst.lines[li]] = static_cast<int>(li);

  for (int t = 0; t < kHours; ++t) {
    const int hour = t + 1;
    auto key = [&](std::initializer_list<int> extra) {
      std::vector<int> k{period, scenario, rd.id, hour};
      k.insert(k.end(), extra);
      return k;
    };

    // EV flows and recharge fractions.
    std::vector<Terms> station(nc);
    for (size_t od = 0; od < nq; ++od) {
      const double flow = inst.traffic(od, rd, t) * theta.at(od);
      b.ev_flow[od][t] = flow;
      const OdAdoption& adopt = inst.coeffs.at(od, period);
      std::set<int> used;
      for (const auto& s : sets[od]) used.insert(s.begin(), s.end());
      for (int ci : used) {
        const NodeId n = inst.candidates[ci];
        const int fr = reg.add(m, "fr", key({static_cast<int>(od), n}), 0, 1);
        b.fr[od][ci][t] = fr;
        m.add_le(indexed_name("fr_open", key({static_cast<int>(od), n})), {{fr, 1}, {link.x[ci], -1}}, 0,
                 "fraction_limit");
        station[ci].emplace_back(fr, -flow);
        if (shift) {
          const double base = inst.traffic(od, rd, t);
          for (const XTerm& term : adopt.expected.terms) {
            const int cj = inst.candidate_index(term.node);
            if (cj < 0 || term.period < 1) continue;
            const int xcol = shift->fs->x[cj][term.period - 1];
            const int prod = reg.add(m, "fr_x", key({static_cast<int>(od), n, term.node, term.period}), 0, 1);
            mccormick_rows(m, prod, fr, xcol, 1.0,
                           indexed_name("frx", key({static_cast<int>(od), n, term.node, term.period})));
            station[ci].emplace_back(prod, -base * term.coef);
          }
        }
      }
      int stranded = kNone;
      if (opt.allow_stranded) {
        const double pen = cost.unserved * e_ev * dt * flow * inst.ods[od].round_trip_arcs.size();
        stranded = reg.add(m, "fr_un", key({static_cast<int>(od)}), 0, 1);
        b.stranded[od][t] = stranded;
        b.cost.emplace_back(stranded, w * pen);
      }
      // At least one recharge per arc. An equality would make some covering
      // plans infeasible when cover sets overlap.
      for (size_t k = 0; k < sets[od].size(); ++k) {
        Terms row;
        for (int ci : sets[od][k]) row.emplace_back(b.fr[od][ci][t], 1.0);
        if (stranded != kNone) row.emplace_back(stranded, 1.0);
        m.add_ge(indexed_name("fr_total", key({static_cast<int>(od), static_cast<int>(k)})), row, 1.0,
                 "fraction_total");
      }
    }

    // Station service.
    for (size_t ci = 0; ci < nc; ++ci) {
      const NodeId n = inst.candidates[ci];
      const int lam = reg.add(m, "lambda", key({n}), 0, kInf);
      const int un = reg.add(m, "lambda_un", key({n}), 0, kInf);
      b.lambda[ci][t] = lam;
      b.lambda_un[ci][t] = un;
      b.cost.emplace_back(un, w * cost.unserved * e_ev * dt);
      Terms row = station[ci];
      row.emplace_back(lam, 1.0);
      row.emplace_back(un, 1.0);
      b.demand_rows[ci][t] = m.add_eq(indexed_name("station", key({n})), row, 0, "station_flow");
      for (size_t p = 0; p < g.pieces().size(); ++p) {
        const auto& piece = g.pieces()[p];
        m.add_le(indexed_name("service", key({n, static_cast<int>(p)})), {{lam, 1}, {link.z[ci], -piece.slope}},
                 piece.intercept, "service");
      }
      if (link.pv[ci] != kNone) {
        const int pre = reg.add(m, "p_re", key({n}), 0, kInf);
        const int pcu = reg.add(m, "p_re_cu", key({n}), 0, kInf);
        b.p_re[ci][t] = pre;
        b.p_cu[ci][t] = pcu;
        b.cost.emplace_back(pcu, w * cost.curtail * 1000.0 * dt);
        m.add_eq(indexed_name("pv_out", key({n})), {{pre, 1}, {pcu, 1}, {link.pv[ci], -inst.pv_output(n, rd, t)}},
                 0, "pv_output");
      }
      if (link.ess[ci] != kNone) {
        const int pc = reg.add(m, "p_es_c", key({n}), 0, kInf);
        const int pd = reg.add(m, "p_es_d", key({n}), 0, kInf);
        const int e = reg.add(m, "e_es", key({n}), 0, kInf);
        b.p_esc[ci][t] = pc;
        b.p_esd[ci][t] = pd;
        b.e_es[ci][t] = e;
        m.add_le(indexed_name("ess_c", key({n})), {{pc, 1}, {link.ess[ci], -tech.iota_c}}, 0, "ess_rate");
        m.add_le(indexed_name("ess_d", key({n})), {{pd, 1}, {link.ess[ci], -tech.iota_d}}, 0, "ess_rate");
        m.add_le(indexed_name("ess_e", key({n})), {{e, 1}, {link.ess[ci], -1}}, 0, "ess_energy");
      }
    }

    // Distribution network.
    for (size_t k = 0; k < nn; ++k) {
      const DnNode& nd = dn.nodes()[k];
      const double pl = inst.p_load(static_cast<int>(k), rd, t);
      const int z = reg.add(m, "zeta", key({nd.id}), 0, 1);
      b.zeta[k][t] = z;
      b.cost.emplace_back(z, w * cost.shed * 1000.0 * dt * std::max(pl, 0.0));
      double lo = opt.relax_limits ? -kInf : nd.u_sqr_min;
      double hi = opt.relax_limits ? kInf : nd.u_sqr_max;
      if (static_cast<int>(k) == dn_root) lo = hi = dn.root_u_sqr();
      b.u[k][t] = reg.add(m, "u_sqr", key({nd.id}), lo, hi);
      if (!at_dn[k].empty()) b.p_ch[k][t] = reg.add(m, "p_ch", key({nd.id}), 0, kInf);
    }
    b.p_up[t] = reg.add(m, "p_up", key({dn.root()}), 0, kInf);
    b.q_up[t] = reg.add(m, "q_up", key({dn.root()}), 0, kInf);
    b.cost.emplace_back(b.p_up[t], w * cost.grid_p * 1000.0 * dt);
    if (inst.options.grid_q_price) b.cost.emplace_back(b.q_up[t], w * cost.grid_q * 1000.0 * dt);

    for (size_t e = 0; e < nl; ++e) {
      const DnLine& line = dn.lines()[e];
      const bool limited = !opt.relax_limits;
      const bool expand = expand_pos[e] != kNone && limited;
      const double pb = limited && !expand ? line.p_max_mw : kInf;
      const double qb = limited && !expand ? line.q_max_mvar : kInf;
      const int p = reg.add(m, "p_line", key({line.from, line.to}), -pb, pb);
      const int q = reg.add(m, "q_line", key({line.from, line.to}), -qb, qb);
      b.p_line[e][t] = p;
      b.q_line[e][t] = q;
      if (expand) {
        const int xl = link.line[expand_pos[e]];
        const std::string nm = indexed_name("", key({line.from, line.to}));
        m.add_le("pl_hi" + nm, {{p, 1}, {xl, -line.p_expansion_mw}}, line.p_max_mw, "line_capacity");
        m.add_le("pl_lo" + nm, {{p, -1}, {xl, -line.p_expansion_mw}}, line.p_max_mw, "line_capacity");
        m.add_le("ql_hi" + nm, {{q, 1}, {xl, -line.q_expansion_mvar}}, line.q_max_mvar, "line_capacity");
        m.add_le("ql_lo" + nm, {{q, -1}, {xl, -line.q_expansion_mvar}}, line.q_max_mvar, "line_capacity");
      }
      const int from = dn.node_index(line.from), to = dn.node_index(line.to);
      m.add_eq(indexed_name("distflow", key({line.from, line.to})),
               {{b.u[from][t], 1}, {b.u[to][t], -1}, {p, -2.0 * line.r_pu / dn.base_mva()},
                {q, -2.0 * line.x_pu / dn.base_mva()}},
               0, "distflow");
    }

    for (size_t k = 0; k < nn; ++k) {
      const DnNode& nd = dn.nodes()[k];
      const double pl = inst.p_load(static_cast<int>(k), rd, t);
      const double ql = inst.q_load(static_cast<int>(k), rd, t);
      Terms pbal{{b.zeta[k][t], -pl}}, qbal{{b.zeta[k][t], -ql}};
      for (size_t e = 0; e < nl; ++e) {
        const DnLine& line = dn.lines()[e];
        if (line.from == nd.id) {
          pbal.emplace_back(b.p_line[e][t], 1.0);
          qbal.emplace_back(b.q_line[e][t], 1.0);
        } else if (line.to == nd.id) {
          pbal.emplace_back(b.p_line[e][t], -1.0);
          qbal.emplace_back(b.q_line[e][t], -1.0);
        }
      }
      if (static_cast<int>(k) == dn_root) {
        pbal.emplace_back(b.p_up[t], -1.0);
        qbal.emplace_back(b.q_up[t], -1.0);
      }
      if (b.p_ch[k][t] != kNone) {
        pbal.emplace_back(b.p_ch[k][t], 1.0);
        Terms coupling{{b.p_ch[k][t], 1.0}};
        for (int ci : at_dn[k]) {
          coupling.emplace_back(b.lambda[ci][t], -e_ev / 1000.0);
          if (b.p_re[ci][t] != kNone) pbal.emplace_back(b.p_re[ci][t], -1.0);
          if (b.p_esc[ci][t] != kNone) {
            pbal.emplace_back(b.p_esc[ci][t], 1.0);
            pbal.emplace_back(b.p_esd[ci][t], -1.0);
          }
        }
        m.add_eq(indexed_name("coupling", key({nd.id})), coupling, 0, "coupling");
      }
      m.add_eq(indexed_name("p_balance", key({nd.id})), pbal, -pl, "power_balance");
      m.add_eq(indexed_name("q_balance", key({nd.id})), qbal, -ql, "power_balance");
    }
  }

  // Cyclic state of charge within the day.
  for (size_t ci = 0; ci < nc; ++ci) {
    if (link.ess[ci] == kNone) continue;
    const NodeId n = inst.candidates[ci];
    for (int t = 0; t < kHours; ++t) {
      const int prev = (t + kHours - 1) % kHours;
      m.add_eq(indexed_name("soc", {period, scenario, rd.id, t + 1, n}),
               {{b.e_es[ci][t], 1}, {b.e_es[ci][prev], -1}, {b.p_esc[ci][t], -tech.eta_c * dt},
                {b.p_esd[ci][t], dt / tech.eta_d}},
               0, "ess_soc");
    }
  }
  return b;
}

DualBlock add_dual_block(LinearModel& m, VariableRegistry& reg, const Instance& inst,
                         const DdasPeriod& ddas, const FirstStage& fs, double M) {
  if (!(M > 0.0) || !std::isfinite(M)) throw Error(ErrorKind::UnboundedDuals, "dual bound must be finite");
  DualBlock b;
  b.period = ddas.period;
  const int g = ddas.period;
  b.kappa = reg.add(m, "kappa", {g}, -kInf, kInf, 1.0);
  auto product = [&](int dual, const XTerm& term, double coef, const char* sym, int od) {
    const int ci = inst.candidate_index(term.node);
    if (ci < 0 || term.period < 1 || coef == 0.0) return;
    const int x = fs.x[ci][term.period - 1];
    for (const Product& p : b.products)
      if (p.dual == dual && p.x == x) {
        m.add_cost(p.nu, coef);
        return;
      }
    const std::vector<int> key{g, od, term.node, term.period};
    const int nu = reg.add(m, sym, key, 0, M, coef);
    mccormick_rows(m, nu, dual, x, M, indexed_name(sym, key));
    b.products.push_back(Product{nu, dual, x});
  };
  for (size_t od = 0; od < ddas.rows.size(); ++od) {
    const DdasOdRows& r = ddas.rows[od];
    const int o = static_cast<int>(od);
    const int am = reg.add(m, "alpha_mu", {g, o}, 0, M, -r.mean_lo.constant);
    const int bm = reg.add(m, "beta_mu", {g, o}, 0, M, r.mean_hi.constant);
    const int av = reg.add(m, "alpha_v", {g, o}, 0, M, -r.second_lo.constant);
    const int bv = reg.add(m, "beta_v", {g, o}, 0, M, r.second_hi.constant);
    b.alpha_mu.push_back(am);
    b.beta_mu.push_back(bm);
    b.alpha_v.push_back(av);
    b.beta_v.push_back(bv);
    for (const XTerm& t : r.mean_lo.terms) product(am, t, -t.coef, "nu_I", o);
    for (const XTerm& t : r.mean_hi.terms) product(bm, t, t.coef, "nu_III", o);
    for (const XTerm& t : r.second_lo.terms) product(av, t, -t.coef, "nu_II", o);
    for (const XTerm& t : r.second_hi.terms) product(bv, t, t.coef, "nu_IV", o);
  }
  return b;
}

Terms dual_row_terms(const DualBlock& b, const std::vector<double>& theta) {
  Terms t{{b.kappa, 1.0}};
  for (size_t od = 0; od < b.alpha_mu.size(); ++od) {
    const double th = theta.at(od);
    t.emplace_back(b.beta_mu[od], th);
    t.emplace_back(b.alpha_mu[od], -th);
    t.emplace_back(b.beta_v[od], th * th);
    t.emplace_back(b.alpha_v[od], -th * th);
  }
  return t;
}

double operation_cost_ceiling(const Instance& inst, int period) {
  const TechParams& tech = inst.tech;
  const CostParams& cost = inst.cost;
  const double e_ev = tech.ev_energy_kwh();
  double total = 0.0;
  for (const RepresentativeDay& rd : inst.days.at(period - 1)) {
    double day = 0.0;
    for (int t = 0; t < kHours; ++t) {
      for (size_t od = 0; od < inst.ods.size(); ++od) {
        double shift = 0.0;
        for (const XTerm& term : inst.coeffs.at(od, period).expected.terms) shift += std::max(term.coef, 0.0);
        const double theta = std::min(1.0, max_theta(inst, od, period) + shift);
        const double visits = static_cast<double>(std::max(inst.ods[od].round_trip_arcs.size(),
                                                           inst.ods[od].path_nodes.size()));
        day += cost.unserved * e_ev * tech.dt_h * inst.traffic(od, rd, t) * theta * visits;
      }
      for (size_t k = 0; k < inst.dn.nodes().size(); ++k) {
        day += cost.shed * 1000.0 * tech.dt_h * std::max(inst.p_load(static_cast<int>(k), rd, t), 0.0);
        day += cost.grid_q * 1000.0 * tech.dt_h * std::abs(inst.q_load(static_cast<int>(k), rd, t));
      }
      for (NodeId n : inst.candidates)
        if (has_pv(inst, n)) day += cost.curtail * 1000.0 * tech.dt_h * tech.pv_max(n);
    }
    total += rd.weight * day;
  }
  return total * inst.operation_factor(period) * inst.options.cost_scale;
}

double default_mccormick_bound(const Instance& inst) {
  double ceiling = 0.0;
  double gap = kInf;
  for (int g = 1; g <= inst.periods; ++g) {
    ceiling = std::max(ceiling, operation_cost_ceiling(inst, g));
    const auto& sup = inst.support.at(g);
    for (size_t od = 0; od < inst.ods.size(); ++od)
      for (size_t a = 0; a < sup.size(); ++a)
        for (size_t b = a + 1; b < sup.size(); ++b) {
          const double d1 = std::abs(sup[a][od] - sup[b][od]);
          const double d2 = std::abs(sup[a][od] * sup[a][od] - sup[b][od] * sup[b][od]);
          if (d1 > 1e-9) gap = std::min(gap, d1);
          if (d2 > 1e-9) gap = std::min(gap, d2);
        }
  }
  if (!std::isfinite(gap)) gap = 1.0;
  const double M = std::max(ceiling, 1e-6) / std::max(gap, 1e-6);
  if (!std::isfinite(M)) throw Error(ErrorKind::UnboundedDuals, "cannot derive a finite dual bound");
  return M;
}

ExtensiveModel build_extensive(const Instance& inst, PlanningMode mode, double M,
                               const OperationOptions& opt,
                               const std::vector<std::vector<double>>* probabilities) {
  ExtensiveModel em;
  em.mode = mode;
  em.M = M;
  const Instance* src = &inst;
  Instance indep;
  if (mode == PlanningMode::DIU) {
    indep = inst.decision_independent();
    src = &indep;
  }
  em.fs = build_first_stage(em.model, em.reg, *src);
  const auto ddas = src->ddas();
  if (mode == PlanningMode::SDD) {
    if (!probabilities) throw Error(ErrorKind::InvalidParams, "sdd needs scenario probabilities");
    em.probabilities = *probabilities;
  }
  for (int g = 1; g <= src->periods; ++g) {
    const StageLink link = stage_link(em.fs, g);
    const auto& sup = src->support.at(g);
    em.blocks.emplace_back();
    em.scenario_cost.emplace_back();
    em.dual_rows.emplace_back();
    if (mode != PlanningMode::SDD) em.duals.push_back(add_dual_block(em.model, em.reg, *src, ddas[g - 1], em.fs, M));
    SddShift shift{&em.fs, g};
    for (size_t s = 0; s < sup.size(); ++s) {
      Terms scen_cost;
      std::vector<OperationBlock> days;
      for (size_t d = 0; d < src->days[g - 1].size(); ++d) {
        days.push_back(add_operation_block(em.model, em.reg, *src, g, static_cast<int>(s), sup[s],
                                           static_cast<int>(d), link, opt,
                                           mode == PlanningMode::SDD ? &shift : nullptr));
        scen_cost.insert(scen_cost.end(), days.back().cost.begin(), days.back().cost.end());
      }
      if (mode == PlanningMode::SDD) {
        const double p = em.probabilities.at(g - 1).at(s);
        for (const auto& [j, c] : scen_cost) em.model.add_cost(j, p * c);
      } else {
        Terms row = dual_row_terms(em.duals.back(), sup[s]);
        for (const auto& [j, c] : scen_cost) row.emplace_back(j, -c);
        em.dual_rows.back().push_back(
            em.model.add_ge(indexed_name("dual_feas", {g, static_cast<int>(s)}), row, 0, "dual_feasibility"));
      }
      em.scenario_cost.back().push_back(std::move(scen_cost));
      em.blocks.back().push_back(std::move(days));
    }
  }
  em.model.validate();
  return em;
}

Plan extract_plan(const Instance& inst, const FirstStage& fs, const std::vector<double>& x) {
  Plan p = empty_plan(inst);
  auto val = [&](int j) { return j < 0 ? 0.0 : x.at(j); };
  for (int g = 0; g < inst.periods; ++g) {
    PeriodPlan& pp = p.periods[g];
    for (size_t ci = 0; ci < inst.candidates.size(); ++ci) {
      pp.x[ci] = static_cast<int>(std::lround(val(fs.x[ci][g])));
      pp.z[ci] = static_cast<int>(std::lround(val(fs.z[ci][g])));
      pp.pv_mw[ci] = std::max(0.0, val(fs.pv[ci][g]));
      pp.ess_mwh[ci] = std::max(0.0, val(fs.ess[ci][g]));
      pp.sub_mw[ci] = std::max(0.0, val(fs.sub[ci][g]));
    }
    for (size_t li = 0; li < inst.lines.size(); ++li)
      pp.line[li] = static_cast<int>(std::lround(val(fs.line[li][g])));
  }
  return p;
}

void fix_first_stage(LinearModel& m, const Instance& inst, const FirstStage& fs, const Plan& plan) {
  for (int g = 0; g < inst.periods; ++g) {
    const PeriodPlan& pp = plan.periods.at(g);
    for (size_t ci = 0; ci < inst.candidates.size(); ++ci) {
      m.set_bounds(fs.x[ci][g], pp.x[ci], pp.x[ci]);
      m.set_bounds(fs.z[ci][g], pp.z[ci], pp.z[ci]);
      if (fs.pv[ci][g] >= 0) m.set_bounds(fs.pv[ci][g], pp.pv_mw[ci], pp.pv_mw[ci]);
      if (fs.ess[ci][g] >= 0) m.set_bounds(fs.ess[ci][g], pp.ess_mwh[ci], pp.ess_mwh[ci]);
      m.set_bounds(fs.sub[ci][g], pp.sub_mw[ci], pp.sub_mw[ci]);
    }
    for (size_t li = 0; li < inst.lines.size(); ++li)
      m.set_bounds(fs.line[li][g], pp.line[li], pp.line[li]);
  }
}

SubproblemModel build_subproblem(const Instance& inst, const Plan& plan, int period,
                                 const std::vector<double>& theta, const OperationOptions& opt,
                                 int scenario) {
  SubproblemModel sp;
  sp.link = add_fixed_link(sp.model, sp.reg, inst, plan, period);
  for (size_t d = 0; d < inst.days.at(period - 1).size(); ++d) {
    sp.blocks.push_back(add_operation_block(sp.model, sp.reg, inst, period, scenario, theta,
                                            static_cast<int>(d), sp.link, opt));
    for (const auto& [j, c] : sp.blocks.back().cost) sp.model.add_cost(j, c);
  }
  return sp;
}

InvestmentBreakdown investment_cost(const Instance& inst, const Plan& plan) {
  const CostParams& c = inst.cost;
  InvestmentBreakdown out;
  const double crf_fcs = capital_recovery_factor(c.interest, c.life_fcs);
  const double crf_cs = capital_recovery_factor(c.interest, c.life_cs);
  const double crf_pv = capital_recovery_factor(c.interest, c.life_pv);
  const double crf_ess = capital_recovery_factor(c.interest, c.life_ess);
  const double crf_line = capital_recovery_factor(c.interest, c.life_line);
  const double crf_sub = capital_recovery_factor(c.interest, c.life_sub);
  for (int g = 1; g <= inst.periods; ++g) {
    const double f = inst.investment_factor(g);
    const PeriodPlan& pp = plan.periods.at(g - 1);
    const PeriodPlan* prev = g >= 2 ? &plan.periods.at(g - 2) : nullptr;
    for (size_t ci = 0; ci < inst.candidates.size(); ++ci) {
      const NodeId n = inst.candidates[ci];
      const int x0 = prev ? prev->x[ci] : 0;
      const int z0 = prev ? prev->z[ci] : 0;
      const double pv0 = prev ? prev->pv_mw[ci] : 0.0;
      const double es0 = prev ? prev->ess_mwh[ci] : 0.0;
      const double sub0 = prev ? prev->sub_mw[ci] : inst.coupling.initial_substation(n);
      out.fcs += f * crf_fcs * c.fcs * std::max(0, pp.x[ci] - x0);
      out.cs += f * crf_cs * c.cs * std::max(0, pp.z[ci] - z0);
      out.pv += f * crf_pv * c.pv * 1000.0 * std::max(0.0, pp.pv_mw[ci] - pv0);
      out.ess += f * crf_ess * c.ess * 1000.0 * std::max(0.0, pp.ess_mwh[ci] - es0);
      out.sub += f * crf_sub * c.sub * 1000.0 * std::max(0.0, pp.sub_mw[ci] - sub0);
    }
    for (size_t li = 0; li < inst.lines.size(); ++li) {
      const DnLine& line = inst.dn.lines()[inst.lines[li]];
      const int l0 = prev ? prev->line[li] : 0;
      out.line += f * crf_line * c.line * line.length_km * line.p_expansion_mw * 1000.0 *
                  std::max(0, pp.line[li] - l0);
    }
  }
  return out;
}

std::string first_stage_violation(const Instance& inst, const Plan& plan) {
  std::ostringstream why;
  const double tol = 1e-7;
  if (static_cast<int>(plan.periods.size()) != inst.periods) return "plan period count mismatch";
  const FcsHistory h = plan.history(inst);
  for (int g = 1; g <= inst.periods; ++g) {
    const PeriodPlan& pp = plan.periods[g - 1];
    const PeriodPlan* prev = g >= 2 ? &plan.periods[g - 2] : nullptr;
    for (size_t ci = 0; ci < inst.candidates.size(); ++ci) {
      const NodeId n = inst.candidates[ci];
      if (pp.x[ci] != 0 && pp.x[ci] != 1) why << "x not binary at " << n << ";";
      if (prev && pp.x[ci] < prev->x[ci]) why << "station removed at " << n << ";";
      if (prev && pp.z[ci] < prev->z[ci]) why << "spots removed at " << n << ";";
      if (pp.z[ci] < inst.tech.z_min * pp.x[ci] - tol || pp.z[ci] > inst.tech.z_max * pp.x[ci] + tol)
        why << "spot count out of range at " << n << ";";
      if (pp.pv_mw[ci] > (has_pv(inst, n) ? inst.tech.pv_max(n) : 0.0) * pp.x[ci] + tol ||
          (prev && pp.pv_mw[ci] < prev->pv_mw[ci] - tol))
        why << "pv capacity invalid at " << n << ";";
      if (pp.ess_mwh[ci] > (has_ess(inst, n) ? inst.tech.ess_max(n) : 0.0) * pp.x[ci] + tol ||
          (prev && pp.ess_mwh[ci] < prev->ess_mwh[ci] - tol))
        why << "ess capacity invalid at " << n << ";";
      const double sub0 = prev ? prev->sub_mw[ci] : inst.coupling.initial_substation(n);
      if (pp.sub_mw[ci] < sub0 - tol || pp.sub_mw[ci] < inst.tech.p_cs_kw / 1000.0 * pp.z[ci] - tol)
        why << "substation capacity invalid at " << n << ";";
    }
    for (size_t li = 0; li < inst.lines.size(); ++li)
      if (prev && pp.line[li] < prev->line[li]) why << "line expansion removed;";
    for (size_t od = 0; od < inst.ods.size(); ++od)
      for (const CoverageEntry& e : inst.coverage[od]) {
        bool ok = false;
        for (NodeId n : e.nodes) ok = ok || h[g].count(n);
        if (!ok) why << "arc (" << e.arc.from << "," << e.arc.to << ") of " << inst.ods[od].key()
                     << " uncovered in period " << g << ";";
      }
  }
  return why.str();
}

}  // namespace fcsp
