#include "fcsp/report.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "fcsp/error.hpp"
#include "json.hpp"

namespace fcsp {

using ojson = nlohmann::ordered_json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

// JSON has no infinity; bounds that never became finite are written as null.
ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

}  // namespace

void write_plan_json(std::ostream& os, const Instance& inst, const Plan& plan) {
  ojson j;
  j["instance"] = inst.name;
  ojson periods = ojson::array();
  for (size_t g = 0; g < plan.periods.size(); ++g) {
    const PeriodPlan& pp = plan.periods[g];
    ojson p;
    p["period"] = g + 1;
    ojson st = ojson::array();
    for (size_t c = 0; c < inst.candidates.size(); ++c) {
      ojson s;
      s["node"] = inst.candidates[c];
      s["open"] = pp.x[c];
      s["spots"] = pp.z[c];
      s["pv_mw"] = pp.pv_mw[c];
      s["ess_mwh"] = pp.ess_mwh[c];
      s["substation_mw"] = pp.sub_mw[c];
      st.push_back(s);
    }
    p["stations"] = st;
    ojson lines = ojson::array();
    for (size_t l = 0; l < inst.lines.size(); ++l) {
      const DnLine& line = inst.dn.lines()[inst.lines[l]];
      lines.push_back(ojson{{"from", line.from}, {"to", line.to}, {"expanded", pp.line[l]}});
    }
    p["lines"] = lines;
    periods.push_back(p);
  }
  j["periods"] = periods;
  os << j.dump(2) << "\n";
}

Plan read_plan_json(std::istream& is, const Instance& inst) {
  try {
    const auto j = nlohmann::json::parse(is);
    Plan plan = empty_plan(inst);
    const auto& periods = j.at("periods");
    if (static_cast<int>(periods.size()) != inst.periods)
      throw Error(ErrorKind::SchemaError, "plan has " + std::to_string(periods.size()) + " periods, instance has " +
                                              std::to_string(inst.periods));
    for (const auto& p : periods) {
      const int g = p.at("period").get<int>();
      if (g < 1 || g > inst.periods) throw Error(ErrorKind::SchemaError, "plan period out of range");
      PeriodPlan& pp = plan.periods[g - 1];
      for (const auto& s : p.at("stations")) {
        const int c = inst.candidate_index(s.at("node").get<NodeId>());
        if (c < 0) throw Error(ErrorKind::SchemaError, "plan station at a non-candidate node");
        pp.x[c] = s.at("open").get<int>();
        pp.z[c] = s.at("spots").get<int>();
        pp.pv_mw[c] = s.value("pv_mw", 0.0);
        pp.ess_mwh[c] = s.value("ess_mwh", 0.0);
        pp.sub_mw[c] = s.value("substation_mw", 0.0);
      }
      for (const auto& l : p.at("lines")) {
        const int from = l.at("from").get<int>(), to = l.at("to").get<int>();
        bool found = false;
        for (size_t k = 0; k < inst.lines.size(); ++k) {
          const DnLine& line = inst.dn.lines()[inst.lines[k]];
          if ((line.from == from && line.to == to) || (line.from == to && line.to == from)) {
            pp.line[k] = l.at("expanded").get<int>();
            found = true;
          }
        }
        if (!found) throw Error(ErrorKind::SchemaError, "plan line is not expandable in the instance");
      }
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("plan file: ") + e.what());
  }
}

void write_solve_report_json(std::ostream& os, const Instance& inst, const SolveReport& rep) {
  ojson j;
  j["instance"] = inst.name;
  j["mode"] = to_string(rep.mode);
  j["method"] = rep.method;
  j["objective"] = num(rep.objective);
  j["lower_bound"] = num(rep.lower_bound);
  j["upper_bound"] = num(rep.upper_bound);
  j["gap"] = num(rep.gap);
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["investment"] = ojson{{"fcs", rep.investment.fcs}, {"cs", rep.investment.cs},     {"pv", rep.investment.pv},
                          {"ess", rep.investment.ess}, {"line", rep.investment.line}, {"sub", rep.investment.sub},
                          {"total", rep.investment.total()}};
  j["operation_cost"] = num(rep.operation_cost);
  j["mccormick"] = ojson{{"M", num(rep.mccormick_M)},
                         {"doublings", rep.m_doublings},
                         {"dual_at_bound", rep.dual_at_bound},
                         {"max_residual", rep.mccormick_residual}};
  j["worst_case"] = rep.worst_case;
  j["diffusion"] = diffusion_trajectory(inst, rep.plan);
  j["warnings"] = rep.warnings;
  os << j.dump(2) << "\n";
}

void write_cost_breakdown_csv(std::ostream& os, const Instance& inst, const SolveReport& rep) {
  os << "period,fcs,cs,pv,ess,line,substation,investment_total\n";
  // Per-period investment from a plan holding only that period's additions.
  InvestmentBreakdown prev;
  for (int g = 1; g <= inst.periods; ++g) {
    Plan partial = empty_plan(inst);
    for (int k = 0; k < g; ++k) partial.periods[k] = rep.plan.periods[k];
    for (int k = g; k < inst.periods; ++k) partial.periods[k] = rep.plan.periods[g - 1];
    const InvestmentBreakdown cum = investment_cost(inst, partial);
    // Later periods repeat period g, so they add nothing new.
    const InvestmentBreakdown d{cum.fcs - prev.fcs, cum.cs - prev.cs,     cum.pv - prev.pv,
                                cum.ess - prev.ess, cum.line - prev.line, cum.sub - prev.sub};
    os << g << ',' << format_number(d.fcs) << ',' << format_number(d.cs) << ',' << format_number(d.pv) << ','
       << format_number(d.ess) << ',' << format_number(d.line) << ',' << format_number(d.sub) << ','
       << format_number(d.total()) << '\n';
    prev = cum;
  }
  const InvestmentBreakdown& t = rep.investment;
  os << "total," << format_number(t.fcs) << ',' << format_number(t.cs) << ',' << format_number(t.pv) << ','
     << format_number(t.ess) << ',' << format_number(t.line) << ',' << format_number(t.sub) << ','
     << format_number(t.total()) << '\n';
  os << "operation,,,,,,," << format_number(rep.operation_cost) << '\n';
  os << "objective,,,,,,," << format_number(rep.objective) << '\n';
}

void write_iteration_log_csv(std::ostream& os, const SolveReport& rep) {
  os << "iter,lower,upper,gap,wall_ms\n";
  for (const IterationRecord& r : rep.log)
    os << r.iter << ',' << format_number(r.lower) << ',' << format_number(r.upper) << ',' << format_number(r.gap)
       << ',' << format_number(std::round(r.wall_ms)) << '\n';
}

void write_distribution_csv(std::ostream& os, const Instance& inst,
                            const std::vector<std::vector<double>>& probabilities) {
  os << "period,scenario,probability";
  for (const std::string& k : inst.od_keys()) os << ",theta_" << k;
  os << '\n';
  for (size_t g = 0; g < probabilities.size(); ++g) {
    const auto& sup = inst.support.at(static_cast<int>(g) + 1);
    for (size_t s = 0; s < probabilities[g].size(); ++s) {
      os << g + 1 << ',' << s << ',' << format_number(probabilities[g][s]);
      for (double th : sup[s]) os << ',' << format_number(th);
      os << '\n';
    }
  }
}

void write_evaluation_json(std::ostream& os, const Instance& inst, const EvaluationReport& rep) {
  ojson j;
  j["instance"] = inst.name;
  j["test"] = to_string(rep.kind);
  j["relax_limits"] = rep.relax_limits;
  j["covered_fraction"] = rep.covered_fraction;
  j["shedding_kwh_per_day"] = rep.shedding_kwh_per_day;
  j["operation_cost"] = rep.operation_cost;
  j["total_operation_cost"] = rep.total_operation_cost;
  ojson nodes = ojson::array();
  for (size_t k = 0; k < rep.v_min.size(); ++k)
    nodes.push_back(ojson{{"node", inst.dn.nodes()[k].id}, {"v_min", num(rep.v_min[k])}, {"v_max", num(rep.v_max[k])}});
  j["voltage"] = nodes;
  ojson lines = ojson::array();
  for (size_t e = 0; e < rep.loading_max.size(); ++e)
    lines.push_back(ojson{{"from", inst.dn.lines()[e].from},
                          {"to", inst.dn.lines()[e].to},
                          {"loading_max", rep.loading_max[e]}});
  j["line_loading"] = lines;
  ojson traj = ojson::object();
  for (size_t od = 0; od < rep.trajectory.size(); ++od) traj[inst.ods[od].key()] = rep.trajectory[od];
  j["diffusion"] = traj;
  if (rep.slice)
    j["slice"] = ojson{{"period", rep.slice->period},
                       {"day", rep.slice->day},
                       {"hour", rep.slice->hour},
                       {"voltage", rep.slice->voltage},
                       {"loading", rep.slice->loading}};
  os << j.dump(2) << "\n";
}

void write_hourly_csv(std::ostream& os, const EvaluationReport& rep) {
  os << "period,day,hour,demand,covered,covered_fraction\n";
  for (size_t g = 0; g < rep.hours.size(); ++g)
    for (size_t d = 0; d < rep.hours[g].size(); ++d)
      for (size_t t = 0; t < rep.hours[g][d].size(); ++t) {
        const HourStat& h = rep.hours[g][d][t];
        os << g + 1 << ',' << d << ',' << t + 1 << ',' << format_number(h.demand) << ','
           << format_number(h.covered) << ',' << format_number(h.covered_fraction) << '\n';
      }
}

void write_voltage_dat(std::ostream& os, const Instance& inst, const EvaluationReport& rep) {
  os << "# node v_min v_max" << (rep.slice ? " v_slice" : "") << '\n';
  for (size_t k = 0; k < rep.v_min.size(); ++k) {
    os << inst.dn.nodes()[k].id << ' ' << format_number(rep.v_min[k]) << ' ' << format_number(rep.v_max[k]);
    if (rep.slice) os << ' ' << format_number(rep.slice->voltage[k]);
    os << '\n';
  }
}

void write_loading_dat(std::ostream& os, const Instance& inst, const EvaluationReport& rep) {
  os << "# from to loading_max" << (rep.slice ? " loading_slice" : "") << '\n';
  for (size_t e = 0; e < rep.loading_max.size(); ++e) {
    os << inst.dn.lines()[e].from << ' ' << inst.dn.lines()[e].to << ' ' << format_number(rep.loading_max[e]);
    if (rep.slice) os << ' ' << format_number(rep.slice->loading[e]);
    os << '\n';
  }
}

void write_coverage_csv(std::ostream& os, const Instance& inst) {
  os << "od,arc_index,arc_from,arc_to,candidate_node\n";
  for (size_t od = 0; od < inst.ods.size(); ++od)
    for (size_t a = 0; a < inst.coverage[od].size(); ++a) {
      const CoverageEntry& e = inst.coverage[od][a];
      for (NodeId n : e.nodes)
        os << inst.ods[od].key() << ',' << a << ',' << e.arc.from << ',' << e.arc.to << ',' << n << '\n';
    }
}

void write_trajectory_csv(std::ostream& os, const Instance& inst,
                          const std::vector<std::vector<double>>& trajectory) {
  os << "od,period,expected_adoption\n";
  for (size_t od = 0; od < trajectory.size(); ++od)
    for (size_t g = 0; g < trajectory[od].size(); ++g)
      os << inst.ods[od].key() << ',' << g + 1 << ',' << format_number(trajectory[od][g]) << '\n';
}

}  // namespace fcsp
