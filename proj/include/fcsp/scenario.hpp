#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fcsp/diffusion.hpp"

namespace fcsp {

struct ScenarioSupport {
  std::uint64_t seed = 0;
  std::vector<std::string> od_keys;
  std::vector<std::vector<std::vector<double>>> periods;  // [period-1][s][od]

  const std::vector<std::vector<double>>& at(int period) const { return periods.at(period - 1); }
  void validate(size_t n_ods) const;
};

// Stratified sampling per OD pair and period over
// [mu - 3 sigma - eps, mu + max shift + 3 sigma + eps] clipped to [0, 1].
ScenarioSupport generate_support(const AdoptionCoefficients& coeffs,
                                 const DiffusionParams& params,
                                 const AmbiguityParams& ambiguity,
                                 const std::vector<std::string>& od_keys, int n_scenarios,
                                 std::uint64_t seed);

void save_support_json(std::ostream& os, const ScenarioSupport& support);
ScenarioSupport load_support_json(std::istream& is);

constexpr int kHours = 24;
using HourlyProfile = std::array<double, kHours>;

struct RepresentativeDay {
  int id = 0;
  double weight = 0.0;  // days per year
  // Keys are OD keys, TN node ids, or DN node ids as strings; "*" is the
  // default for keys without their own profile.
  std::map<std::string, HourlyProfile> traffic;        // vehicles/h
  std::map<std::string, HourlyProfile> traffic_scale;  // multiplies base flow
  std::map<std::string, HourlyProfile> pv;             // per-unit output
  std::map<std::string, HourlyProfile> p_load;         // MW
  std::map<std::string, HourlyProfile> q_load;         // MVar
  std::map<std::string, HourlyProfile> load_scale;     // multiplies base load
};

// Days per period; index [period-1]. A file without a period column applies
// to every period.
using DaySchedule = std::vector<std::vector<RepresentativeDay>>;

DaySchedule load_representative_days(const std::filesystem::path& path, int periods);
DaySchedule parse_representative_days(std::istream& is, int periods);
void save_representative_days(std::ostream& os, const DaySchedule& days);

// Looks up `key`, falling back to "*"; returns nullptr when neither exists.
const HourlyProfile* find_profile(const std::map<std::string, HourlyProfile>& series,
                                  const std::string& key);

}  // namespace fcsp
