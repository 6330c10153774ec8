#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracle.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fcsp_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Outcome run(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(FCSP_CLI) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + err.string();
  const int st = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  o.err = ss.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string toy(const std::string& f = "config.json") { return (oracle::data_dir() / "toy" / f).string(); }

double json_number(const std::string& text, const std::string& key) {
  const size_t k = text.find("\"" + key + "\":");
  if (k == std::string::npos) return std::nan("");
  return std::stod(text.substr(k + key.size() + 3));
}

}  // namespace

TEST(Cli, PlanBendersOnToy) {
  const fs::path d = scratch("benders");
  const Outcome o = run("plan -c " + toy() + " -o " + (d / "run").string() + " --mode ddu --method benders", d);
  ASSERT_EQ(o.code, 0) << o.err;
  for (const char* f : {"plan.json", "report.json", "cost_breakdown.csv", "iterations.csv", "worst_case.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(d / "run" / f)) << f;
  const std::string rep = slurp(d / "run" / "report.json");
  EXPECT_LE(json_number(rep, "gap"), 1e-4);
  EXPECT_NE(slurp(d / "run" / "iterations.csv").find("iter,lower,upper,gap,wall_ms"), std::string::npos);
}

TEST(Cli, RerunsAreByteIdentical) {
  const fs::path d = scratch("rerun");
  for (const char* r : {"a", "b"}) {
    const Outcome o = run("plan -c " + toy() + " -o " + (d / r).string(), d);
    ASSERT_EQ(o.code, 0) << o.err;
    const Outcome e = run("evaluate -c " + toy() + " -o " + (d / r / "rgd").string() + " --plan " +
                              (d / r / "plan.json").string() + " --test rgd --draws 3 --seed 5",
                          d);
    ASSERT_EQ(e.code, 0) << e.err;
  }
  for (const char* f : {"plan.json", "report.json", "cost_breakdown.csv", "worst_case.csv", "rgd/evaluation_0.json",
                        "rgd/hourly_2.csv", "rgd/distribution_1.csv"})
    EXPECT_EQ(slurp(d / "a" / f), slurp(d / "b" / f)) << f;
}

TEST(Cli, DiuMatchesDduWithoutIncentives) {
  const fs::path d = scratch("diu");
  ASSERT_EQ(run("plan -c " + toy("config_independent.json") + " -o " + (d / "ddu").string(), d).code, 0);
  ASSERT_EQ(run("plan -c " + toy("config_independent.json") + " -o " + (d / "diu").string() + " --mode diu", d).code, 0);
  EXPECT_EQ(slurp(d / "ddu" / "plan.json"), slurp(d / "diu" / "plan.json"));
}

TEST(Cli, AblationFlagsNeverLowerObjective) {
  const fs::path d = scratch("ablation");
  ASSERT_EQ(run("plan -c " + toy("config_der.json") + " -o " + (d / "full").string(), d).code, 0);
  ASSERT_EQ(run("plan -c " + toy("config_der.json") + " -o " + (d / "none").string() + " --no-pv --no-ess", d).code, 0);
  const double full = json_number(slurp(d / "full" / "report.json"), "objective");
  const double none = json_number(slurp(d / "none" / "report.json"), "objective");
  EXPECT_GE(none, full * (1 - 1e-9));
}

TEST(Cli, OtherCommandsWriteTheirFiles) {
  const fs::path d = scratch("others");
  ASSERT_EQ(run("plan -c " + toy() + " -o " + (d / "p").string(), d).code, 0);
  const std::string plan = (d / "p" / "plan.json").string();
  Outcome o = run("evaluate -c " + toy() + " -o " + (d / "e").string() + " --plan " + plan + " --test ed --relax-limits --slice 1,0,18", d);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(d / "e" / "voltage.dat"));
  EXPECT_TRUE(fs::exists(d / "e" / "loading.dat"));
  o = run("worst-case -c " + toy() + " -o " + (d / "w").string() + " --plan " + plan + " --full", d);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(d / "w" / "worst_case.csv"));
  o = run("gen-scenarios -c " + toy() + " -o " + (d / "g").string(), d);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(d / "g" / "support.json"));
  o = run("coverage-sets -c " + toy() + " -o " + (d / "k").string(), d);
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string cov = slurp(d / "k" / "coverage.csv");
  EXPECT_EQ(cov.rfind("od,arc_index,arc_from,arc_to,candidate_node\n", 0), 0u);
  o = run("vd3rs -c " + toy("config_independent.json") + " -o " + (d / "v").string(), d);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(json_number(slurp(d / "v" / "vd3rs.json"), "vd3rs"), 0.0);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path d = scratch("config_err");
  EXPECT_EQ(run("plan -c " + (d / "missing.json").string() + " -o " + (d / "r").string(), d).code, 2);
  EXPECT_EQ(run("plan -c " + toy() + " -o " + (d / "r").string() + " --bogus", d).code, 2);
  EXPECT_EQ(run("plan -c " + toy() + " -o " + (d / "r").string() + " --mode maybe", d).code, 2);
  EXPECT_EQ(run("", d).code, 2);
  // Unknown config keys are rejected with a JSON error.
  std::string cfg = slurp(toy());
  cfg.insert(cfg.find('{') + 1, "\"colour\": 1,");
  const fs::path bad = d / "bad.json";
  std::string resolved = cfg;
  for (const char* f : {"transport.json", "distribution.json", "coupling.json", "ods.json", "days.csv"}) {
    const std::string q = std::string("\"") + f + "\"";
    const size_t at = resolved.find(q);
    if (at != std::string::npos) resolved.replace(at, q.size(), "\"" + (oracle::data_dir() / "toy" / f).string() + "\"");
  }
  std::ofstream(bad) << resolved;
  const Outcome o = run("plan -c " + bad.string() + " -o " + (d / "r").string(), d);
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("\"exit_code\":2"), std::string::npos) << o.err;
  EXPECT_TRUE(fs::exists(d / "r" / "error.json"));
}

TEST(Cli, InfeasibleInputExitsFour) {
  const fs::path d = scratch("infeasible");
  std::string cfg = slurp(toy());
  for (const char* f : {"transport.json", "distribution.json", "coupling.json", "ods.json", "days.csv"}) {
    const std::string q = std::string("\"") + f + "\"";
    const size_t at = cfg.find(q);
    ASSERT_NE(at, std::string::npos) << f;
    cfg.replace(at, q.size(), "\"" + (oracle::data_dir() / "toy" / f).string() + "\"");
  }
  // A 20-mile range cannot traverse any arc of the toy path.
  const size_t r = cfg.find("\"range_mi\"");
  ASSERT_NE(r, std::string::npos);
  const size_t colon = cfg.find(':', r), end = cfg.find_first_of(",}", colon);
  cfg.replace(colon + 1, end - colon - 1, " 20");
  std::ofstream(d / "short.json") << cfg;
  const Outcome o = run("plan -c " + (d / "short.json").string() + " -o " + (d / "r").string(), d);
  EXPECT_EQ(o.code, 4) << o.err;
  EXPECT_NE(o.err.find("\"error\""), std::string::npos);
}

TEST(Cli, HelpListsEveryFlag) {
  const fs::path d = scratch("help");
  ASSERT_EQ(run("plan --help", d).code, 0);
  const std::string out = slurp(d / "stdout.txt");
  for (const char* f : {"--config", "--run-dir", "--mode", "--method", "--no-pv", "--no-ess", "--gap", "--max-iter"})
    EXPECT_NE(out.find(f), std::string::npos) << f;
}
