#include "fcsp/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "fcsp/error.hpp"
#include "fcsp/log.hpp"
#include "fcsp/scenario.hpp"

namespace fcsp {

namespace {

double clamp_adoption(double value, double K, const char* what) {
  if (value < 0.0 || value > K) {
    std::ostringstream msg;
    msg << what << " " << value << " clamped to [0, " << K << "]";
    warn(msg.str());
    return std::clamp(value, 0.0, K);
  }
  return value;
}

}  // namespace

void DiffusionParams::validate() const {
  if (periods < 1) throw Error(ErrorKind::InvalidParams, "need at least one period");
  for (const OdDiffusion& p : ods) {
    if (static_cast<int>(p.a.size()) != periods || static_cast<int>(p.sigma.size()) != periods)
      throw Error(ErrorKind::InvalidParams, "diffusion rate and sigma need one value per period");
    if (!(p.theta0 > 0.0) || !(p.theta0 < p.K) || p.K > 1.0)
      throw Error(ErrorKind::InvalidParams, "need 0 < theta0 < K <= 1");
    for (double a : p.a)
      if (!(a >= 0.0)) throw Error(ErrorKind::InvalidParams, "diffusion rate must be >= 0");
    for (double s : p.sigma)
      if (!(s >= 0.0)) throw Error(ErrorKind::InvalidParams, "sigma must be >= 0");
    for (const auto& [n, v] : p.delta_d)
      if (!(v >= 0.0)) throw Error(ErrorKind::InvalidParams, "incentive factor must be >= 0");
    if (!p.delta_upsilon.empty() && static_cast<int>(p.delta_upsilon.size()) != periods)
      throw Error(ErrorKind::InvalidParams, "variance incentive needs one map per period");
    for (const auto& m : p.delta_upsilon)
      for (const auto& [n, v] : m)
        if (!(v >= 0.0)) throw Error(ErrorKind::InvalidParams, "variance incentive must be >= 0");
  }
}

void AmbiguityParams::validate() const {
  for (const auto& od : radii)
    for (const AmbiguityRadii& r : od) {
      if (!(r.eps_mu >= 0.0)) throw Error(ErrorKind::InvalidParams, "eps_mu must be >= 0");
      if (!(r.eps_v_low > 0.0) || r.eps_v_low > 1.0 || r.eps_v_high < 1.0)
        throw Error(ErrorKind::InvalidParams, "need 0 < eps_v_low <= 1 <= eps_v_high");
    }
}

double AffineX::eval(const FcsHistory& x) const {
  double v = constant;
  for (const XTerm& t : terms) {
    if (t.period >= 0 && t.period < static_cast<int>(x.size()) && x[t.period].count(t.node))
      v += t.coef;
  }
  return v;
}

double convenience_level(const OdDiffusion& p, const std::set<NodeId>& open_prev) {
  double d = 1.0;
  for (const auto& [node, dd] : p.delta_d)
    if (open_prev.count(node)) d += dd;
  return d;
}

std::vector<std::vector<double>> exact_adoption_recursion(const DiffusionParams& params,
                                                          const FcsHistory& x) {
  if (static_cast<int>(x.size()) < params.periods)
    throw Error(ErrorKind::InvalidParams, "history must cover periods 0..G-1");
  std::vector<std::vector<double>> out;
  for (const OdDiffusion& p : params.ods) {
    std::vector<double> theta(params.periods + 1, p.theta0);
    for (int g = 1; g <= params.periods; ++g) {
      double prev = theta[g - 1];
      double step = p.a[g - 1] * convenience_level(p, x[g - 1]) * (1.0 - prev / p.K);
      theta[g] = clamp_adoption(prev + step, p.K, "exact adoption");
    }
    out.push_back(std::move(theta));
  }
  return out;
}

AdoptionCoefficients adoption_coefficients(const DiffusionParams& params) {
  params.validate();
  AdoptionCoefficients c;
  c.periods = params.periods;
  for (const OdDiffusion& p : params.ods) {
    std::vector<OdAdoption> row;
    for (int g = 1; g <= params.periods; ++g) {
      double prod = 1.0;
      for (int q = 1; q <= g; ++q) prod *= p.a[q - 1];
      const double damp = p.theta0 * prod / p.K;
      OdAdoption entry;
      entry.mu_bar = p.theta0;
      for (int r = 1; r <= g; ++r) entry.mu_bar += p.a[r - 1] - damp;
      entry.expected.constant = entry.mu_bar;
      // x[i, 0] is the fixed pre-horizon state, so slopes start at r = 2.
      for (int r = 2; r <= g; ++r) {
        const double rate = p.a[r - 1] - damp;
        for (const auto& [node, dd] : p.delta_d) {
          if (dd == 0.0 || rate == 0.0) continue;
          entry.expected.terms.push_back(XTerm{node, r - 1, rate * dd});
        }
      }
      row.push_back(std::move(entry));
    }
    c.table.push_back(std::move(row));
  }
  return c;
}

double expected_adoption(const AdoptionCoefficients& coeffs, const DiffusionParams& params,
                         size_t od, int period, const FcsHistory& x) {
  return clamp_adoption(coeffs.at(od, period).expected.eval(x), params.ods.at(od).K,
                        "expected adoption");
}

namespace {

AffineX second_moment_affine(const AdoptionCoefficients& coeffs, const DiffusionParams& params,
                             size_t od, int period, double multiplier) {
  const OdDiffusion& p = params.ods.at(od);
  const double mu = coeffs.at(od, period).mu_bar;
  const double sigma = p.sigma.at(period - 1);
  const double base = (mu * mu + sigma * sigma) * multiplier;
  AffineX f;
  f.constant = base;
  if (period >= 2 && !p.delta_upsilon.empty()) {
    for (const auto& [node, dv] : p.delta_upsilon.at(period - 1)) {
      if (dv == 0.0) continue;
      f.terms.push_back(XTerm{node, period - 1, base * dv});
    }
  }
  return f;
}

}  // namespace

MomentInterval second_moment_bound(const AdoptionCoefficients& coeffs,
                                   const DiffusionParams& params,
                                   const AmbiguityParams& ambiguity, size_t od, int period,
                                   const std::set<NodeId>& open_prev) {
  const AmbiguityRadii& r = ambiguity.at(od, period);
  FcsHistory x(period);
  if (period >= 2) x[period - 1] = open_prev;
  return MomentInterval{second_moment_affine(coeffs, params, od, period, r.eps_v_low).eval(x),
                        second_moment_affine(coeffs, params, od, period, r.eps_v_high).eval(x)};
}

std::vector<DdasPeriod> ambiguity_constraint_rows(const AdoptionCoefficients& coeffs,
                                                  const DiffusionParams& params,
                                                  const AmbiguityParams& ambiguity,
                                                  const ScenarioSupport& support) {
  std::vector<DdasPeriod> out;
  if (static_cast<int>(support.periods.size()) != coeffs.periods)
    throw Error(ErrorKind::EmptySupport, "support must cover every period");
  for (int g = 1; g <= coeffs.periods; ++g) {
    DdasPeriod dp;
    dp.period = g;
    dp.support = support.at(g);
    if (dp.support.empty()) throw Error(ErrorKind::EmptySupport, "empty support in period " + std::to_string(g));
    for (size_t od = 0; od < params.ods.size(); ++od) {
      const AmbiguityRadii& r = ambiguity.at(od, g);
      DdasOdRows rows;
      rows.mean_lo = coeffs.at(od, g).expected;
      rows.mean_lo.constant -= r.eps_mu;
      rows.mean_hi = coeffs.at(od, g).expected;
      rows.mean_hi.constant += r.eps_mu;
      rows.second_lo = second_moment_affine(coeffs, params, od, g, r.eps_v_low);
      rows.second_hi = second_moment_affine(coeffs, params, od, g, r.eps_v_high);
      dp.rows.push_back(std::move(rows));
    }
    out.push_back(std::move(dp));
  }
  return out;
}

double ddas_violation(const DdasPeriod& rows, const FcsHistory& x, const std::vector<double>& pi) {
  if (pi.size() != rows.support.size())
    throw Error(ErrorKind::InvalidParams, "probability vector size mismatch");
  double total = 0.0;
  double worst = 0.0;
  for (double p : pi) {
    total += p;
    worst = std::max(worst, -p);
  }
  worst = std::max(worst, std::abs(total - 1.0));
  for (size_t od = 0; od < rows.rows.size(); ++od) {
    double m1 = 0.0, m2 = 0.0;
    for (size_t s = 0; s < pi.size(); ++s) {
      const double th = rows.support[s][od];
      m1 += pi[s] * th;
      m2 += pi[s] * th * th;
    }
    const DdasOdRows& r = rows.rows[od];
    worst = std::max({worst, r.mean_lo.eval(x) - m1, m1 - r.mean_hi.eval(x),
                      r.second_lo.eval(x) - m2, m2 - r.second_hi.eval(x)});
  }
  return worst;
}

void write_coefficients_csv(std::ostream& os, const AdoptionCoefficients& coeffs,
                            const std::vector<OdPair>& ods) {
  os << "od,period,term,node,x_period,value\n";
  os.precision(17);
  for (size_t od = 0; od < coeffs.table.size(); ++od) {
    const std::string key = od < ods.size() ? ods[od].key() : std::to_string(od);
    for (int g = 1; g <= coeffs.periods; ++g) {
      const OdAdoption& e = coeffs.at(od, g);
      os << key << "," << g << ",mu_bar,,," << e.mu_bar << "\n";
      for (const XTerm& t : e.expected.terms)
        os << key << "," << g << ",delta_mu," << t.node << "," << t.period << "," << t.coef << "\n";
    }
  }
}

}  // namespace fcsp
