#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <vector>

#include "fcsp/network.hpp"

namespace fcsp {

// open[r] = nodes with an FCS at the end of period r; open[0] is the
// pre-horizon state and is empty for greenfield planning.
using FcsHistory = std::vector<std::set<NodeId>>;

struct OdDiffusion {
  std::vector<double> a;      // basic diffusion rate, one per period 1..G
  double K = 1.0;             // market potential
  double theta0 = 0.0;        // initial adoption
  std::vector<double> sigma;  // empirical std dev per period
  std::map<NodeId, double> delta_d;                    // incentive factor per node
  std::vector<std::map<NodeId, double>> delta_upsilon;  // per period, per node
};

struct DiffusionParams {
  int periods = 0;
  std::vector<OdDiffusion> ods;

  void validate() const;
};

struct AmbiguityRadii {
  double eps_mu = 0.0;      // absolute first-moment radius
  double eps_v_low = 1.0;   // second-moment multipliers
  double eps_v_high = 1.0;
};

struct AmbiguityParams {
  std::vector<std::vector<AmbiguityRadii>> radii;  // [od][period-1]

  const AmbiguityRadii& at(size_t od, int period) const { return radii.at(od).at(period - 1); }
  void validate() const;
};

// Affine function of FCS indicators: constant + sum coef * x[node, period].
struct XTerm {
  NodeId node = 0;
  int period = 0;  // index into FcsHistory
  double coef = 0.0;
};

struct AffineX {
  double constant = 0.0;
  std::vector<XTerm> terms;

  double eval(const FcsHistory& x) const;
};

struct OdAdoption {
  double mu_bar = 0.0;
  AffineX expected;  // mu_bar + slope terms on x[i, r-1], r = 2..period
};

struct AdoptionCoefficients {
  int periods = 0;
  std::vector<std::vector<OdAdoption>> table;  // [od][period-1]

  const OdAdoption& at(size_t od, int period) const { return table.at(od).at(period - 1); }
};

double convenience_level(const OdDiffusion& p, const std::set<NodeId>& open_prev);

// Exact logistic recursion. Result [od][r] for r = 0..periods, [od][0] = theta0.
std::vector<std::vector<double>> exact_adoption_recursion(const DiffusionParams& params,
                                                          const FcsHistory& x);

AdoptionCoefficients adoption_coefficients(const DiffusionParams& params);

// Linearized expected adoption, clamped to [0, K] with a warning.
double expected_adoption(const AdoptionCoefficients& coeffs, const DiffusionParams& params,
                         size_t od, int period, const FcsHistory& x);

struct MomentInterval {
  double lower = 0.0;
  double upper = 0.0;
};

// Second-moment interval at period `period` given the open nodes at period-1.
MomentInterval second_moment_bound(const AdoptionCoefficients& coeffs,
                                   const DiffusionParams& params,
                                   const AmbiguityParams& ambiguity, size_t od, int period,
                                   const std::set<NodeId>& open_prev);

struct DdasOdRows {
  AffineX mean_lo;
  AffineX mean_hi;
  AffineX second_lo;
  AffineX second_hi;
};

// Ambiguity set of one period: probability simplex over the support plus
// four moment rows per OD pair whose bounds are affine in x.
struct DdasPeriod {
  int period = 0;
  std::vector<std::vector<double>> support;  // [s][od]
  std::vector<DdasOdRows> rows;              // [od]

  size_t scenarios() const { return support.size(); }
};

struct ScenarioSupport;

std::vector<DdasPeriod> ambiguity_constraint_rows(const AdoptionCoefficients& coeffs,
                                                  const DiffusionParams& params,
                                                  const AmbiguityParams& ambiguity,
                                                  const ScenarioSupport& support);

// Checks pi against a period's rows at plan x; returns the largest violation.
double ddas_violation(const DdasPeriod& rows, const FcsHistory& x, const std::vector<double>& pi);

void write_coefficients_csv(std::ostream& os, const AdoptionCoefficients& coeffs,
                            const std::vector<OdPair>& ods);

}  // namespace fcsp
