#pragma once

#include <stdexcept>
#include <string>

namespace fcsp {

enum class ErrorKind {
  NoPath,
  InfeasibleArc,
  InvalidParams,
  EmptySupport,
  DegenerateSpread,
  SchemaError,
  NonFiniteValue,
  NonConcaveServiceCurve,
  InfeasibleCoverage,
  EmptyAmbiguitySet,
  UnboundedDuals,
  SolverUnavailable,
  SolverFailure,
  Infeasible,
  IterationLimit,
  DualUnavailable,
  Config,
};

const char* to_string(ErrorKind kind);

// Process exit code for the CLI: 2 config, 3 solver, 4 infeasible input.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fcsp
