#include "fcsp/config.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "fcsp/error.hpp"
#include "json.hpp"

namespace fcsp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
  }
}

// Unknown keys are errors so typos do not silently fall back to defaults.
void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::SchemaError, where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw Error(ErrorKind::Config, "unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::map<NodeId, double> node_map(const json& j) {
  std::map<NodeId, double> out;
  for (const auto& [k, v] : j.items()) out[std::stoi(k)] = v.get<double>();
  return out;
}

CostParams parse_cost(const json& j) {
  check_keys(j, {"fcs", "cs", "pv", "ess", "line", "sub", "grid_p", "grid_q", "unserved", "curtail", "shed",
                 "interest", "life_fcs", "life_cs", "life_pv", "life_ess", "life_line", "life_sub",
                 "period_years"},
             "cost");
  CostParams c;
  read(j, "fcs", c.fcs);
  read(j, "cs", c.cs);
  read(j, "pv", c.pv);
  read(j, "ess", c.ess);
  read(j, "line", c.line);
  read(j, "sub", c.sub);
  read(j, "grid_p", c.grid_p);
  read(j, "grid_q", c.grid_q);
  read(j, "unserved", c.unserved);
  read(j, "curtail", c.curtail);
  read(j, "shed", c.shed);
  read(j, "interest", c.interest);
  read(j, "life_fcs", c.life_fcs);
  read(j, "life_cs", c.life_cs);
  read(j, "life_pv", c.life_pv);
  read(j, "life_ess", c.life_ess);
  read(j, "life_line", c.life_line);
  read(j, "life_sub", c.life_sub);
  read(j, "period_years", c.period_years);
  return c;
}

TechParams parse_tech(const json& j) {
  check_keys(j, {"range_mi", "ed_kwh_per_mi", "p_cs_kw", "eta_ev", "z_min", "z_max", "pv_max_mw", "ess_max_mwh",
                 "pv_max_node", "ess_max_node", "iota_c", "iota_d", "eta_c", "eta_d", "dt_h", "coverage_reserve",
                 "service"},
             "tech");
  TechParams t;
  read(j, "range_mi", t.range_mi);
  read(j, "ed_kwh_per_mi", t.ed_kwh_per_mi);
  read(j, "p_cs_kw", t.p_cs_kw);
  read(j, "eta_ev", t.eta_ev);
  read(j, "z_min", t.z_min);
  read(j, "z_max", t.z_max);
  read(j, "pv_max_mw", t.pv_max_mw);
  read(j, "ess_max_mwh", t.ess_max_mwh);
  if (j.contains("pv_max_node")) t.pv_max_node = node_map(j.at("pv_max_node"));
  if (j.contains("ess_max_node")) t.ess_max_node = node_map(j.at("ess_max_node"));
  read(j, "iota_c", t.iota_c);
  read(j, "iota_d", t.iota_d);
  read(j, "eta_c", t.eta_c);
  read(j, "eta_d", t.eta_d);
  read(j, "dt_h", t.dt_h);
  read(j, "coverage_reserve", t.coverage_reserve);
  if (j.contains("service")) t.service = ServiceCurve(j.at("service").get<std::vector<std::pair<double, double>>>());
  return t;
}

ModelOptions parse_model(const json& j) {
  check_keys(j, {"cost_scale", "allow_stranded", "pv", "ess", "mccormick_m", "grid_q_price"}, "model");
  ModelOptions o;
  read(j, "cost_scale", o.cost_scale);
  read(j, "allow_stranded", o.allow_stranded);
  read(j, "pv", o.pv);
  read(j, "ess", o.ess);
  read(j, "mccormick_m", o.mccormick_m);
  read(j, "grid_q_price", o.grid_q_price);
  return o;
}

SolveConfig parse_solver(const json& j) {
  check_keys(j, {"backend", "gap_tol", "max_iter", "relaxation_rounds", "time_limit", "threads", "max_m_doublings", "verbose"}, "solver");
  SolveConfig c;
  read(j, "backend", c.backend);
  read(j, "gap_tol", c.gap_tol);
  read(j, "max_iter", c.max_iter);
  read(j, "relaxation_rounds", c.relaxation_rounds);
  read(j, "time_limit", c.time_limit);
  read(j, "threads", c.threads);
  read(j, "max_m_doublings", c.max_m_doublings);
  read(j, "verbose", c.verbose);
  if (!(c.gap_tol >= 0.0) || c.max_iter < 1 || c.relaxation_rounds < 0 || c.threads < 1 || c.max_m_doublings < 0)
    throw Error(ErrorKind::Config, "invalid solver options");
  return c;
}

TransportNetwork parse_tn(const json& j) {
  check_keys(j, {"nodes", "edges", "arcs", "candidates"}, "transport network");
  const auto nodes = j.at("nodes").get<std::vector<NodeId>>();
  std::set<NodeId> cand;
  if (j.contains("candidates")) {
    const auto c = j.at("candidates").get<std::vector<NodeId>>();
    cand.insert(c.begin(), c.end());
  } else {
    cand.insert(nodes.begin(), nodes.end());
  }
  auto arcs = [](const json& list) {
    std::vector<Arc> out;
    for (const json& e : list) {
      check_keys(e, {"from", "to", "length"}, "edge");
      out.push_back(Arc{e.at("from").get<NodeId>(), e.at("to").get<NodeId>(), e.at("length").get<double>()});
    }
    return out;
  };
  if (j.contains("arcs") == j.contains("edges"))
    throw Error(ErrorKind::SchemaError, "transport network needs exactly one of 'edges' or 'arcs'");
  if (j.contains("edges")) return TransportNetwork::from_edges(nodes, arcs(j.at("edges")), cand);
  return TransportNetwork(nodes, arcs(j.at("arcs")), cand);
}

DistributionNetwork parse_dn(const json& j) {
  check_keys(j, {"nodes", "lines", "root", "base_mva", "root_u_sqr"}, "distribution network");
  std::vector<DnNode> nodes;
  for (const json& n : j.at("nodes")) {
    check_keys(n, {"id", "u_sqr_min", "u_sqr_max", "p_load_mw", "q_load_mvar"}, "distribution node");
    DnNode d;
    d.id = n.at("id").get<int>();
    read(n, "u_sqr_min", d.u_sqr_min);
    read(n, "u_sqr_max", d.u_sqr_max);
    read(n, "p_load_mw", d.p_load_mw);
    read(n, "q_load_mvar", d.q_load_mvar);
    nodes.push_back(d);
  }
  std::vector<DnLine> lines;
  for (const json& l : j.at("lines")) {
    check_keys(l, {"from", "to", "r_pu", "x_pu", "p_max_mw", "q_max_mvar", "expandable", "length_km",
                   "p_expansion_mw", "q_expansion_mvar"},
               "distribution line");
    DnLine d;
    d.from = l.at("from").get<int>();
    d.to = l.at("to").get<int>();
    d.r_pu = l.at("r_pu").get<double>();
    d.x_pu = l.at("x_pu").get<double>();
    d.p_max_mw = l.at("p_max_mw").get<double>();
    d.q_max_mvar = l.at("q_max_mvar").get<double>();
    read(l, "expandable", d.expandable);
    read(l, "length_km", d.length_km);
    read(l, "p_expansion_mw", d.p_expansion_mw);
    read(l, "q_expansion_mvar", d.q_expansion_mvar);
    lines.push_back(d);
  }
  return DistributionNetwork(std::move(nodes), std::move(lines), j.at("root").get<int>(),
                             j.value("base_mva", 1.0), j.value("root_u_sqr", 1.0));
}

CouplingMap parse_coupling(const json& j) {
  check_keys(j, {"links"}, "coupling");
  CouplingMap c;
  for (const json& l : j.at("links")) {
    check_keys(l, {"tn", "dn", "substation_mw"}, "coupling link");
    const NodeId n = l.at("tn").get<NodeId>();
    if (!c.tn_to_dn.emplace(n, l.at("dn").get<int>()).second)
      throw Error(ErrorKind::SchemaError, "transport node " + std::to_string(n) + " coupled twice");
    if (l.contains("substation_mw")) c.substation_mw[n] = l.at("substation_mw").get<double>();
  }
  return c;
}

template <class F>
auto guarded(const fs::path& path, F&& f) {
  try {
    return f(read_json(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
  }
}

}  // namespace

TransportNetwork load_transport_network(const fs::path& path) {
  return guarded(path, [](const json& j) { return parse_tn(j); });
}

DistributionNetwork load_distribution_network(const fs::path& path) {
  return guarded(path, [](const json& j) { return parse_dn(j); });
}

CouplingMap load_coupling(const fs::path& path) {
  return guarded(path, [](const json& j) { return parse_coupling(j); });
}

LoadedConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  LoadedConfig c = parse_config(ss.str(), path.parent_path());
  c.file = path;
  return c;
}

LoadedConfig parse_config(const std::string& text, const fs::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config: ") + e.what());
  }
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  try {
    check_keys(j, {"name", "transport", "distribution", "coupling", "ods", "days", "periods", "scenarios",
                   "ambiguity", "cost", "tech", "model", "solver", "filter"},
               "config");
    LoadedConfig out;
    Instance& inst = out.instance;
    inst.name = j.value("name", std::string("instance"));
    inst.periods = j.at("periods").get<int>();
    if (inst.periods < 1) throw Error(ErrorKind::Config, "periods must be at least 1");
    inst.tn = load_transport_network(resolve(j.at("transport").get<std::string>()));
    inst.dn = load_distribution_network(resolve(j.at("distribution").get<std::string>()));
    inst.coupling = load_coupling(resolve(j.at("coupling").get<std::string>()));
    if (j.contains("cost")) inst.cost = parse_cost(j.at("cost"));
    if (j.contains("tech")) inst.tech = parse_tech(j.at("tech"));
    if (j.contains("model")) inst.options = parse_model(j.at("model"));
    if (j.contains("solver")) out.solve = parse_solver(j.at("solver"));

    AmbiguityRadii base_radii;
    double eps_rel = 0.0;
    bool relative = true;
    if (j.contains("ambiguity")) {
      const json& a = j.at("ambiguity");
      check_keys(a, {"eps_mu_relative", "eps_mu", "eps_v_low", "eps_v_high"}, "ambiguity");
      if (a.contains("eps_mu_relative") && a.contains("eps_mu"))
        throw Error(ErrorKind::Config, "give either eps_mu_relative or eps_mu");
      if (a.contains("eps_mu")) {
        relative = false;
        base_radii.eps_mu = a.at("eps_mu").get<double>();
      }
      read(a, "eps_mu_relative", eps_rel);
      read(a, "eps_v_low", base_radii.eps_v_low);
      read(a, "eps_v_high", base_radii.eps_v_high);
    }

    // OD pairs with their diffusion data.
    const json od_file = read_json(resolve(j.at("ods").get<std::string>()));
    check_keys(od_file, {"ods"}, "od file");
    std::vector<OdPair> ods;
    std::vector<double> flows;
    std::vector<OdDiffusion> diff;
    std::vector<std::optional<double>> eps_override;
    for (const json& o : od_file.at("ods")) {
      check_keys(o, {"origin", "destination", "path", "flow", "a", "K", "theta0", "sigma", "delta_d",
                     "delta_upsilon", "eps_mu"},
                 "od pair");
      OdPair od = o.contains("path") ? make_od_pair(inst.tn, o.at("path").get<std::vector<NodeId>>())
                                     : shortest_path(inst.tn, o.at("origin").get<NodeId>(),
                                                     o.at("destination").get<NodeId>());
      if (o.contains("path") && (od.origin != o.at("origin").get<NodeId>() ||
                                 od.destination != o.at("destination").get<NodeId>()))
        throw Error(ErrorKind::SchemaError, "path endpoints differ from origin/destination");
      OdDiffusion d;
      d.a = o.at("a").get<std::vector<double>>();
      read(o, "K", d.K);
      d.theta0 = o.at("theta0").get<double>();
      d.sigma = o.at("sigma").get<std::vector<double>>();
      if (o.contains("delta_d")) d.delta_d = node_map(o.at("delta_d"));
      if (o.contains("delta_upsilon"))
        for (const json& m : o.at("delta_upsilon")) d.delta_upsilon.push_back(node_map(m));
      d.delta_upsilon.resize(inst.periods);
      ods.push_back(std::move(od));
      flows.push_back(o.at("flow").get<double>());
      diff.push_back(std::move(d));
      eps_override.push_back(o.contains("eps_mu") ? std::optional<double>(o.at("eps_mu").get<double>())
                                                  : std::nullopt);
    }
    double threshold = 0.0;
    if (j.contains("filter")) {
      check_keys(j.at("filter"), {"recharge_threshold"}, "filter");
      threshold = j.at("filter").at("recharge_threshold").get<double>();
    }
    if (threshold > 0.0) {
      const auto kept = filter_od_pairs(ods, inst.tech.range_mi, threshold);
      std::set<std::string> keep;
      for (const OdPair& od : kept) keep.insert(od.key());
      for (size_t i = 0; i < ods.size(); ++i) {
        if (!keep.count(ods[i].key())) continue;
        inst.ods.push_back(ods[i]);
        inst.base_flow.push_back(flows[i]);
        inst.diffusion.ods.push_back(diff[i]);
        // Keep the override aligned with the surviving pairs.
        eps_override[inst.ods.size() - 1] = eps_override[i];
      }
      eps_override.resize(inst.ods.size());
    } else {
      inst.ods = ods;
      inst.base_flow = flows;
      inst.diffusion.ods = diff;
    }
    if (inst.ods.empty()) throw Error(ErrorKind::InvalidParams, "no OD pair left after filtering");
    inst.diffusion.periods = inst.periods;
    inst.diffusion.validate();
    inst.coeffs = adoption_coefficients(inst.diffusion);

    inst.ambiguity.radii.assign(inst.ods.size(), {});
    for (size_t od = 0; od < inst.ods.size(); ++od)
      for (int g = 1; g <= inst.periods; ++g) {
        AmbiguityRadii r = base_radii;
        if (eps_override[od]) r.eps_mu = *eps_override[od];
        else if (relative) r.eps_mu = eps_rel * inst.coeffs.at(od, g).mu_bar;
        inst.ambiguity.radii[od].push_back(r);
      }
    inst.ambiguity.validate();

    inst.days = load_representative_days(resolve(j.at("days").get<std::string>()), inst.periods);

    const json sc = j.value("scenarios", json::object());
    check_keys(sc, {"file", "count", "seed"}, "scenarios");
    if (sc.contains("file")) {
      std::ifstream in(resolve(sc.at("file").get<std::string>()));
      if (!in) throw Error(ErrorKind::Config, "cannot open scenario file");
      inst.support = load_support_json(in);
      if (inst.support.od_keys != inst.od_keys())
        throw Error(ErrorKind::SchemaError, "scenario file OD keys do not match the instance");
      out.scenarios_from_file = true;
      out.scenario_seed = inst.support.seed;
      out.scenario_count = inst.support.periods.empty() ? 0 : static_cast<int>(inst.support.periods[0].size());
    } else {
      out.scenario_count = sc.value("count", 4);
      out.scenario_seed = sc.value("seed", std::uint64_t{1});
      inst.support = generate_support(inst.coeffs, inst.diffusion, inst.ambiguity, inst.od_keys(),
                                      out.scenario_count, out.scenario_seed);
    }
    inst.finalize();
    out.solve.op.allow_stranded = inst.options.allow_stranded;
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config: ") + e.what());
  }
}

}  // namespace fcsp
