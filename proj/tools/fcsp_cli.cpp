// Command-line driver: plan, evaluate, worst-case, vd3rs, gen-scenarios,
// coverage-sets. Every command writes into --run-dir plus a manifest.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fcsp/config.hpp"
#include "fcsp/error.hpp"
#include "fcsp/evaluate.hpp"
#include "fcsp/log.hpp"
#include "fcsp/report.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace fcsp;
using ojson = nlohmann::ordered_json;

namespace {

struct Run {
  std::string command;
  std::string config;
  std::string run_dir;
  std::vector<std::string> args;
  std::vector<std::string> files;
  std::vector<std::string> warnings;

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(fs::path(run_dir) / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::Config, "cannot write " + (fs::path(run_dir) / name).string());
    body(out);
    files.push_back(name);
  }

  void manifest(int exit_code, const std::string& error = {}) {
    ojson m;
    m["command"] = command;
    m["arguments"] = args;
    m["config"] = config;
    m["files"] = files;
    m["warnings"] = warnings;
    m["exit_code"] = exit_code;
    if (!error.empty()) m["error"] = error;
    std::ofstream out(fs::path(run_dir) / "manifest.json", std::ios::binary);
    out << m.dump(2) << "\n";
  }
};

LoadedConfig load(const std::string& path, bool no_pv, bool no_ess) {
  LoadedConfig c = load_config(path);
  if (const char* env = std::getenv("DDRO_SOLVER"); env && *env) c.solve.backend = env;
  if (no_pv || no_ess) {
    if (no_pv) c.instance.options.pv = false;
    if (no_ess) c.instance.options.ess = false;
  }
  return c;
}

Plan load_plan(const std::string& path, const Instance& inst) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open plan " + path);
  return read_plan_json(in, inst);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-period fast-charging station planning under decision-dependent adoption uncertainty"};
  app.require_subcommand(1);

  Run run;
  std::string mode = "ddu", method = "extensive", plan_path, test = "wcd", slice_text;
  bool no_pv = false, no_ess = false, relax = false, full = false;
  int draws = 20;
  std::uint64_t seed = 1;
  double gap_tol = -1.0;
  int max_iter = -1;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", run.config, "Instance config JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--run-dir", run.run_dir, "Output directory (created if missing)")->required();
  };

  auto* plan = app.add_subcommand("plan", "Solve the planning model and write the plan and cost reports");
  common(plan);
  plan->add_option("--mode", mode, "Ambiguity model")->check(CLI::IsMember({"ddu", "diu", "sdd"}));
  plan->add_option("--method", method, "Solution method")->check(CLI::IsMember({"extensive", "benders"}));
  plan->add_flag("--no-pv", no_pv, "Disallow on-site PV");
  plan->add_flag("--no-ess", no_ess, "Disallow on-site storage");
  plan->add_option("--gap", gap_tol, "Relative optimality gap (overrides the config)");
  plan->add_option("--max-iter", max_iter, "Benders iteration limit (overrides the config)");

  auto* eval = app.add_subcommand("evaluate", "Out-of-sample evaluation of a plan");
  common(eval);
  eval->add_option("--plan", plan_path, "Plan JSON written by 'plan'")->required()->check(CLI::ExistingFile);
  eval->add_option("--test", test, "Test distribution")->check(CLI::IsMember({"wcd", "rgd", "ed"}));
  eval->add_flag("--relax-limits", relax, "Drop voltage and line-rating limits and report them instead");
  eval->add_option("--draws", draws, "Number of random distributions for rgd")->check(CLI::PositiveNumber);
  eval->add_option("--seed", seed, "Seed for rgd draws");
  eval->add_option("--slice", slice_text, "Audit slice period,day,hour for voltage and loading");

  auto* wc = app.add_subcommand("worst-case", "Worst-case distribution of a fixed plan");
  common(wc);
  wc->add_option("--plan", plan_path, "Plan JSON written by 'plan'")->required()->check(CLI::ExistingFile);
  wc->add_option("--mode", mode, "Ambiguity model")->check(CLI::IsMember({"ddu", "diu"}));
  wc->add_flag("--full", full, "Keep every second-stage copy in the dual model");

  auto* vd = app.add_subcommand("vd3rs", "Value of modelling decision-dependent adoption");
  common(vd);
  vd->add_option("--method", method, "Solution method")->check(CLI::IsMember({"extensive", "benders"}));

  auto* gen = app.add_subcommand("gen-scenarios", "Write the scenario support and adoption coefficients");
  common(gen);

  auto* cov = app.add_subcommand("coverage-sets", "Write the arc coverage sets of every OD pair");
  common(cov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version exit 0; usage errors count as configuration errors.
    return app.exit(e) == 0 ? 0 : 2;
  }
  for (int i = 1; i < argc; ++i) run.args.emplace_back(argv[i]);
  run.command = app.get_subcommands().front()->get_name();

  set_warning_handler([&](const std::string& msg) {
    run.warnings.push_back(msg);
    std::cerr << "warning: " << msg << "\n";
  });

  try {
    std::error_code ec;
    fs::create_directories(run.run_dir, ec);
    if (ec) throw Error(ErrorKind::Config, "cannot create run directory " + run.run_dir);
    fs::remove(fs::path(run.run_dir) / "error.json", ec);

    LoadedConfig cfg = load(run.config, no_pv, no_ess);
    Instance& inst = cfg.instance;
    if (gap_tol >= 0.0) cfg.solve.gap_tol = gap_tol;
    if (max_iter > 0) cfg.solve.max_iter = max_iter;
    auto backend = make_backend(cfg.solve.backend);
    int exit_code = 0;

    if (run.command == "plan") {
      const PlanningMode pm = parse_mode(mode);
      SolveReport rep;
      if (pm == PlanningMode::SDD) {
        if (method == "benders") throw Error(ErrorKind::Config, "sdd is solved with --method extensive");
        // Stochastic baseline: equal weights on the support.
        std::vector<std::vector<double>> probs;
        for (int g = 1; g <= inst.periods; ++g) {
          const size_t S = inst.support.at(g).size();
          probs.emplace_back(S, 1.0 / static_cast<double>(S));
        }
        rep = solve_extensive(inst, pm, cfg.solve, &probs);
      } else {
        check_ddas_nonempty(*backend, inst, nullptr, inst.candidates.size() <= 8);
        rep = method == "benders" ? solve_benders(inst, pm, cfg.solve) : solve_extensive(inst, pm, cfg.solve);
      }
      run.write("plan.json", [&](std::ostream& os) { write_plan_json(os, inst, rep.plan); });
      run.write("report.json", [&](std::ostream& os) { write_solve_report_json(os, inst, rep); });
      run.write("cost_breakdown.csv", [&](std::ostream& os) { write_cost_breakdown_csv(os, inst, rep); });
      run.write("iterations.csv", [&](std::ostream& os) { write_iteration_log_csv(os, rep); });
      if (!rep.worst_case.empty())
        run.write("worst_case.csv", [&](std::ostream& os) { write_distribution_csv(os, inst, rep.worst_case); });
      std::cout << "objective " << format_number(rep.objective) << " gap " << format_number(rep.gap) << "\n";
      if (!rep.converged) {
        ojson e{{"error", to_string(ErrorKind::IterationLimit)},
                {"message", "limit reached; best plan written"},
                {"exit_code", exit_code = fcsp::exit_code(ErrorKind::IterationLimit)}};
        std::cerr << e.dump() << "\n";
      }
    } else if (run.command == "evaluate") {
      const Plan p = load_plan(plan_path, inst);
      SimulateOptions so;
      so.relax_limits = relax;
      so.allow_stranded = inst.options.allow_stranded;
      if (!slice_text.empty()) {
        AuditSlice s;
        char c1 = 0, c2 = 0;
        std::istringstream ss(slice_text);
        if (!(ss >> s.period >> c1 >> s.day >> c2 >> s.hour) || c1 != ',' || c2 != ',' || s.period < 1 ||
            s.period > inst.periods || s.hour < 1 || s.hour > kHours || s.day < 0 ||
            s.day >= static_cast<int>(inst.days[s.period - 1].size()))
          throw Error(ErrorKind::Config, "--slice expects period,day,hour within the instance");
        so.slice = s;
      }
      const TestKind kind = parse_test_kind(test);
      std::vector<TestSet> sets;
      if (kind == TestKind::WCD) sets.push_back(worst_case_test_set(*backend, inst, p, cfg.solve.op));
      if (kind == TestKind::ED) sets.push_back(empirical_test_set(inst, p));
      if (kind == TestKind::RGD) sets = random_test_sets(*backend, inst, p, draws, seed);
      for (size_t k = 0; k < sets.size(); ++k) {
        const EvaluationReport rep = simulate_plan(*backend, inst, p, sets[k], so);
        const std::string suffix = sets.size() > 1 ? "_" + std::to_string(k) : "";
        run.write("evaluation" + suffix + ".json", [&](std::ostream& os) { write_evaluation_json(os, inst, rep); });
        run.write("hourly" + suffix + ".csv", [&](std::ostream& os) { write_hourly_csv(os, rep); });
        run.write("voltage" + suffix + ".dat", [&](std::ostream& os) { write_voltage_dat(os, inst, rep); });
        run.write("loading" + suffix + ".dat", [&](std::ostream& os) { write_loading_dat(os, inst, rep); });
        run.write("distribution" + suffix + ".csv",
                  [&](std::ostream& os) { write_distribution_csv(os, inst, sets[k].probabilities); });
        std::cout << "test " << to_string(kind) << suffix << " operation_cost "
                  << format_number(rep.total_operation_cost) << " covered " << format_number(rep.covered_fraction)
                  << "\n";
      }
    } else if (run.command == "worst-case") {
      const Plan p = load_plan(plan_path, inst);
      const WorstCase w = worst_case_distribution(*backend, inst, p, parse_mode(mode), full, cfg.solve.op);
      run.write("worst_case.csv", [&](std::ostream& os) { write_distribution_csv(os, inst, w.delta); });
      ojson j;
      j["mode"] = mode;
      j["form"] = full ? "full" : "reduced";
      std::vector<double> dollars;
      for (double v : w.inner_value) dollars.push_back(v / inst.options.cost_scale);
      j["period_value"] = dollars;
      j["delta"] = w.delta;
      run.write("worst_case.json", [&](std::ostream& os) { os << j.dump(2) << "\n"; });
    } else if (run.command == "vd3rs") {
      const Vd3rsResult r = vd3rs(inst, cfg.solve, method);
      ojson j;
      j["vd3rs"] = r.value;
      j["f_ddu_plan"] = r.f_ddu;
      j["f_diu_plan"] = r.f_diu_plan;
      j["method"] = method;
      j["same_plan"] = r.ddu_plan == r.diu_plan;
      run.write("vd3rs.json", [&](std::ostream& os) { os << j.dump(2) << "\n"; });
      run.write("plan_ddu.json", [&](std::ostream& os) { write_plan_json(os, inst, r.ddu_plan); });
      run.write("plan_diu.json", [&](std::ostream& os) { write_plan_json(os, inst, r.diu_plan); });
      std::cout << "vd3rs " << format_number(r.value) << "\n";
    } else if (run.command == "gen-scenarios") {
      run.write("support.json", [&](std::ostream& os) { save_support_json(os, inst.support); });
      run.write("coefficients.csv", [&](std::ostream& os) { write_coefficients_csv(os, inst.coeffs, inst.ods); });
    } else if (run.command == "coverage-sets") {
      run.write("coverage.csv", [&](std::ostream& os) { write_coverage_csv(os, inst); });
    }
    run.manifest(exit_code);
    return exit_code;
  } catch (const Error& e) {
    const int code = exit_code(e.kind());
    ojson j{{"error", to_string(e.kind())}, {"message", e.what()}, {"exit_code", code}};
    std::cerr << j.dump() << "\n";
    if (!run.run_dir.empty() && fs::is_directory(run.run_dir)) {
      std::ofstream(fs::path(run.run_dir) / "error.json") << j.dump(2) << "\n";
      run.manifest(code, e.what());
    }
    return code;
  } catch (const std::exception& e) {
    ojson j{{"error", "Internal"}, {"message", e.what()}, {"exit_code", 3}};
    std::cerr << j.dump() << "\n";
    return 3;
  }
}
