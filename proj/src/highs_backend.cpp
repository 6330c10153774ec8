#include <Highs.h>

#include <chrono>
#include <cstdlib>

#include "fcsp/error.hpp"
#include "fcsp/solver.hpp"

namespace fcsp {

namespace {

class HighsBackend : public SolverBackend {
 public:
  std::string name() const override { return "highs"; }

  SolveResult solve(const LinearModel& m, const SolveOptions& opt) override {
    const auto start = std::chrono::steady_clock::now();
    Highs highs;
    highs.setOptionValue("output_flag", opt.verbose);
    highs.setOptionValue("threads", opt.threads);
    highs.setOptionValue("random_seed", 0);
    highs.setOptionValue("mip_rel_gap", opt.mip_rel_gap);
    highs.setOptionValue("mip_abs_gap", 0.0);
    if (opt.time_limit < kInf) highs.setOptionValue("time_limit", opt.time_limit);

    HighsLp lp;
    lp.num_col_ = m.num_cols();
    lp.num_row_ = m.num_rows();
    lp.sense_ = ObjSense::kMinimize;
    lp.offset_ = m.offset();
    const bool mip = m.is_mip();
    for (const Column& c : m.cols()) {
      lp.col_cost_.push_back(c.cost);
      lp.col_lower_.push_back(c.lb);
      lp.col_upper_.push_back(c.ub);
      if (mip)
        lp.integrality_.push_back(c.type == VarType::Continuous ? HighsVarType::kContinuous
                                                                : HighsVarType::kInteger);
    }
    for (const Row& r : m.rows()) {
      lp.row_lower_.push_back(r.lb);
      lp.row_upper_.push_back(r.ub);
    }
    lp.a_matrix_.format_ = MatrixFormat::kRowwise;
    lp.a_matrix_.num_col_ = lp.num_col_;
    lp.a_matrix_.num_row_ = lp.num_row_;
    lp.a_matrix_.start_.assign(m.num_rows() + 1, 0);
    for (int i = 0; i <= m.num_rows(); ++i) lp.a_matrix_.start_[i] = m.row_start(i);
    lp.a_matrix_.index_ = m.indices();
    lp.a_matrix_.value_ = m.values();

    SolveResult res;
    if (highs.passModel(std::move(lp)) == HighsStatus::kError) {
      res.status = SolveStatus::Error;
      return res;
    }
    const HighsStatus run = highs.run();
    const HighsModelStatus ms = highs.getModelStatus();
    const HighsInfo& info = highs.getInfo();
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (run == HighsStatus::kError) {
      res.status = SolveStatus::Error;
      return res;
    }
    switch (ms) {
      case HighsModelStatus::kOptimal:
        res.status = SolveStatus::Optimal;
        break;
      case HighsModelStatus::kInfeasible:
        res.status = SolveStatus::Infeasible;
        return res;
      case HighsModelStatus::kUnbounded:
      case HighsModelStatus::kUnboundedOrInfeasible:
        res.status = SolveStatus::Unbounded;
        return res;
      case HighsModelStatus::kTimeLimit:
      case HighsModelStatus::kIterationLimit:
        res.status = SolveStatus::TimeLimit;
        if (info.primal_solution_status != kSolutionStatusFeasible) return res;
        break;
      default:
        res.status = SolveStatus::Error;
        return res;
    }
    const HighsSolution& sol = highs.getSolution();
    res.x = sol.col_value;
    res.objective = info.objective_function_value;
    res.bound = mip ? info.mip_dual_bound : res.objective;
    if (!mip && sol.dual_valid) {
      res.row_dual = sol.row_dual;
      res.col_dual = sol.col_dual;
      res.has_duals = true;
    }
    return res;
  }
};

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::Error: return "error";
  }
  return "?";
}

std::unique_ptr<SolverBackend> make_backend(const std::string& name) {
  std::string chosen = name;
  if (chosen.empty()) {
    const char* env = std::getenv("DDRO_SOLVER");
    chosen = env && *env ? env : "highs";
  }
  if (chosen == "highs") return std::make_unique<HighsBackend>();
  throw Error(ErrorKind::SolverUnavailable, "solver backend '" + chosen + "' is not available");
}

SolveResult solve_or_throw(SolverBackend& backend, const LinearModel& m, const SolveOptions& opt,
                           const std::string& what) {
  SolveResult r = backend.solve(m, opt);
  if (r.status == SolveStatus::Infeasible)
    throw Error(ErrorKind::Infeasible, what + " is infeasible");
  if (r.status == SolveStatus::TimeLimit && r.x.empty())
    throw Error(ErrorKind::IterationLimit, what + " hit the time limit without a solution");
  if (r.status != SolveStatus::Optimal && r.status != SolveStatus::TimeLimit)
    throw Error(ErrorKind::SolverFailure, what + " ended with status " + to_string(r.status));
  return r;
}

}  // namespace fcsp
