#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fcsp/linear_model.hpp"

namespace fcsp {

enum class SolveStatus { Optimal, Infeasible, Unbounded, TimeLimit, Error };

const char* to_string(SolveStatus s);

struct SolveOptions {
  double mip_rel_gap = 1e-6;
  double time_limit = kInf;
  int threads = 1;
  bool verbose = false;
};

// Duals follow one convention for every backend: row_dual[i] is the rate of
// change of the optimal objective per unit increase of row i's active bound,
// col_dual[j] the same for column j's active bound (the reduced cost).
struct SolveResult {
  SolveStatus status = SolveStatus::Error;
  double objective = kInf;
  double bound = -kInf;  // MIP dual bound, equal to objective for LPs
  std::vector<double> x;
  std::vector<double> row_dual;
  std::vector<double> col_dual;
  bool has_duals = false;
  double seconds = 0.0;
};

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const LinearModel& m, const SolveOptions& opt) = 0;
};

// Backend by name; an empty name reads DDRO_SOLVER and defaults to "highs".
std::unique_ptr<SolverBackend> make_backend(const std::string& name = {});

// Solves and throws SolverFailure / Infeasible for non-optimal outcomes.
SolveResult solve_or_throw(SolverBackend& backend, const LinearModel& m, const SolveOptions& opt,
                           const std::string& what);

}  // namespace fcsp
