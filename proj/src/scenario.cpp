#include "fcsp/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "fcsp/error.hpp"
#include "fcsp/log.hpp"
#include "json.hpp"

namespace fcsp {

namespace {

// Uniform [0,1) from the top 53 bits; mt19937_64 output is fully specified,
// so the stream is reproducible across platforms.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

double parse_number(const std::string& text, int line_no) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    if (text == "nan" || text == "inf" || text == "-inf" || text == "NaN")
      throw Error(ErrorKind::NonFiniteValue, "non-finite value on line " + std::to_string(line_no));
    throw Error(ErrorKind::SchemaError, "bad number '" + text + "' on line " + std::to_string(line_no));
  }
  if (!std::isfinite(v))
    throw Error(ErrorKind::NonFiniteValue, "non-finite value on line " + std::to_string(line_no));
  return v;
}

std::map<std::string, HourlyProfile>* series_slot(RepresentativeDay& d, const std::string& name) {
  if (name == "traffic") return &d.traffic;
  if (name == "traffic_scale") return &d.traffic_scale;
  if (name == "pv") return &d.pv;
  if (name == "p_load") return &d.p_load;
  if (name == "q_load") return &d.q_load;
  if (name == "load_scale") return &d.load_scale;
  return nullptr;
}

}  // namespace

void ScenarioSupport::validate(size_t n_ods) const {
  if (periods.empty()) throw Error(ErrorKind::EmptySupport, "support has no periods");
  for (const auto& per : periods) {
    if (per.empty()) throw Error(ErrorKind::EmptySupport, "period with no scenarios");
    for (const auto& s : per) {
      if (s.size() != n_ods) throw Error(ErrorKind::SchemaError, "scenario vector length mismatch");
      for (double v : s)
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
          throw Error(ErrorKind::SchemaError, "scenario values must lie in [0,1]");
    }
  }
}

ScenarioSupport generate_support(const AdoptionCoefficients& coeffs,
                                 const DiffusionParams& params,
                                 const AmbiguityParams& ambiguity,
                                 const std::vector<std::string>& od_keys, int n_scenarios,
                                 std::uint64_t seed) {
  if (n_scenarios < 2) throw Error(ErrorKind::InvalidParams, "need at least two scenarios");
  ScenarioSupport out;
  out.seed = seed;
  out.od_keys = od_keys;
  std::mt19937_64 rng(seed);
  const size_t n_ods = params.ods.size();
  for (int g = 1; g <= coeffs.periods; ++g) {
    std::vector<double> lo(n_ods), hi(n_ods);
    bool all_degenerate = true;
    for (size_t od = 0; od < n_ods; ++od) {
      const OdAdoption& e = coeffs.at(od, g);
      const double sigma = params.ods[od].sigma[g - 1];
      const double eps = ambiguity.at(od, g).eps_mu;
      double shift = 0.0;
      for (const XTerm& t : e.expected.terms) shift += std::max(0.0, t.coef);
      lo[od] = std::clamp(e.mu_bar - 3.0 * sigma - eps, 0.0, 1.0);
      hi[od] = std::clamp(e.mu_bar + shift + 3.0 * sigma + eps, 0.0, 1.0);
      if (sigma > 0.0 || eps > 0.0) {
        // The second-moment ceiling with every variance incentive active must
        // also be reachable.
        const AmbiguityRadii& r = ambiguity.at(od, g);
        double boost = 1.0;
        if (g >= 2 && !params.ods[od].delta_upsilon.empty())
          for (const auto& [n, dv] : params.ods[od].delta_upsilon[g - 1]) boost += dv;
        const double m2 = (e.mu_bar * e.mu_bar + sigma * sigma) * boost * r.eps_v_high;
        hi[od] = std::clamp(std::max(hi[od], std::sqrt(m2) + sigma), 0.0, 1.0);
        all_degenerate = false;
      } else {
        lo[od] = hi[od] = std::clamp(e.mu_bar, 0.0, 1.0);
      }
    }
    if (all_degenerate) {
      warn("degenerate spread in period " + std::to_string(g) + ": singleton support");
      std::vector<double> point(n_ods);
      for (size_t od = 0; od < n_ods; ++od) point[od] = lo[od];
      out.periods.push_back({point});
      continue;
    }
    std::vector<std::vector<double>> scen(n_scenarios, std::vector<double>(n_ods));
    for (size_t od = 0; od < n_ods; ++od) {
      std::vector<int> perm(n_scenarios);
      for (int k = 0; k < n_scenarios; ++k) perm[k] = k;
      for (int k = n_scenarios - 1; k > 0; --k) {
        int j = static_cast<int>(rng() % static_cast<std::uint64_t>(k + 1));
        std::swap(perm[k], perm[j]);
      }
      for (int s = 0; s < n_scenarios; ++s) {
        const double u = (perm[s] + uniform01(rng)) / n_scenarios;
        scen[s][od] = lo[od] + u * (hi[od] - lo[od]);
      }
    }
    out.periods.push_back(std::move(scen));
  }
  return out;
}

void save_support_json(std::ostream& os, const ScenarioSupport& support) {
  nlohmann::ordered_json j;
  j["seed"] = support.seed;
  j["od_keys"] = support.od_keys;
  nlohmann::ordered_json periods = nlohmann::ordered_json::array();
  for (const auto& per : support.periods) periods.push_back(per);
  j["periods"] = periods;
  os << j.dump(2) << "\n";
}

ScenarioSupport load_support_json(std::istream& is) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
    ScenarioSupport s;
    s.seed = j.value("seed", std::uint64_t{0});
    s.od_keys = j.at("od_keys").get<std::vector<std::string>>();
    s.periods = j.at("periods").get<std::vector<std::vector<std::vector<double>>>>();
    s.validate(s.od_keys.size());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("scenario file: ") + e.what());
  }
}

const HourlyProfile* find_profile(const std::map<std::string, HourlyProfile>& series,
                                  const std::string& key) {
  auto it = series.find(key);
  if (it != series.end()) return &it->second;
  it = series.find("*");
  return it == series.end() ? nullptr : &it->second;
}

DaySchedule load_representative_days(const std::filesystem::path& path, int periods) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::SchemaError, "cannot open " + path.string());
  return parse_representative_days(in, periods);
}

DaySchedule parse_representative_days(std::istream& is, int periods) {
  if (periods < 1) throw Error(ErrorKind::InvalidParams, "need at least one period");
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::SchemaError, "empty representative-day file");
  const auto header = split_csv_line(line);
  auto col = [&](const std::string& name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_period = col("period"), c_day = col("day"), c_hour = col("hour"),
            c_series = col("series"), c_key = col("key"), c_value = col("value");
  for (auto [c, name] : {std::pair{c_day, "day"}, {c_hour, "hour"}, {c_series, "series"},
                         {c_key, "key"}, {c_value, "value"}})
    if (c < 0) throw Error(ErrorKind::SchemaError, std::string("missing column '") + name + "'");

  // (period, day) -> day record plus the hours seen per (series, key)
  std::map<std::pair<int, int>, RepresentativeDay> days;
  std::map<std::pair<int, int>, std::map<std::string, std::set<int>>> seen;
  std::set<std::pair<int, int>> weighted;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw Error(ErrorKind::SchemaError, "wrong field count on line " + std::to_string(line_no));
    const int period = c_period >= 0 ? static_cast<int>(parse_number(f[c_period], line_no)) : 0;
    if (c_period >= 0 && (period < 1 || period > periods))
      throw Error(ErrorKind::SchemaError, "period out of range on line " + std::to_string(line_no));
    const int day = static_cast<int>(parse_number(f[c_day], line_no));
    const std::string& series = f[c_series];
    const std::string& key = f[c_key];
    const double value = parse_number(f[c_value], line_no);
    auto id = std::make_pair(period, day);
    RepresentativeDay& d = days[id];
    d.id = day;
    if (series == "weight") {
      if (!(value > 0.0)) throw Error(ErrorKind::SchemaError, "day weight must be positive");
      if (!weighted.insert(id).second)
        throw Error(ErrorKind::SchemaError, "duplicate weight for day " + std::to_string(day));
      d.weight = value;
      continue;
    }
    auto* slot = series_slot(d, series);
    if (!slot) throw Error(ErrorKind::SchemaError, "unknown series '" + series + "'");
    const int hour = static_cast<int>(parse_number(f[c_hour], line_no));
    if (hour < 1 || hour > kHours)
      throw Error(ErrorKind::SchemaError, "hour must be 1..24 on line " + std::to_string(line_no));
    if (series == "pv" && (value < 0.0 || value > 1.0))
      throw Error(ErrorKind::SchemaError, "pv output must be within [0,1]");
    if (value < 0.0 && series != "q_load")
      throw Error(ErrorKind::SchemaError, series + " must be non-negative");
    auto& hours = seen[id][series + "\x1f" + key];
    if (!hours.insert(hour).second)
      throw Error(ErrorKind::SchemaError, "duplicate hour on line " + std::to_string(line_no));
    (*slot)[key][hour - 1] = value;
  }
  for (const auto& [id, per_series] : seen)
    for (const auto& [name, hours] : per_series)
      if (hours.size() != kHours)
        throw Error(ErrorKind::SchemaError, "profile with fewer than 24 hours in day " +
                                                std::to_string(id.second));
  for (const auto& [id, d] : days)
    if (!weighted.count(id))
      throw Error(ErrorKind::SchemaError, "day " + std::to_string(id.second) + " has no weight");

  DaySchedule out(periods);
  for (auto& [id, d] : days) {
    if (id.first == 0) {
      for (int g = 0; g < periods; ++g) out[g].push_back(d);
    } else {
      out[id.first - 1].push_back(d);
    }
  }
  for (int g = 0; g < periods; ++g) {
    auto& list = out[g];
    if (list.empty())
      throw Error(ErrorKind::SchemaError, "no representative days for period " + std::to_string(g + 1));
    double total = 0.0;
    for (const auto& d : list) total += d.weight;
    if (std::abs(total - 365.0) > 0.01 * 365.0) {
      std::ostringstream msg;
      msg << "day weights of period " << g + 1 << " sum to " << total << ", rescaled to 365";
      warn(msg.str());
    }
    if (total != 365.0) {
      const double scale = 365.0 / total;
      for (auto& d : list) d.weight *= scale;
    }
  }
  return out;
}

void save_representative_days(std::ostream& os, const DaySchedule& days) {
  os << "period,day,hour,series,key,value\n";
  auto dump = [&](int period, int day, const char* name,
                  const std::map<std::string, HourlyProfile>& series) {
    for (const auto& [key, prof] : series)
      for (int h = 0; h < kHours; ++h)
        os << period << "," << day << "," << h + 1 << "," << name << "," << key << ","
           << format_double(prof[h]) << "\n";
  };
  for (size_t g = 0; g < days.size(); ++g) {
    const int period = static_cast<int>(g) + 1;
    for (const RepresentativeDay& d : days[g]) {
      os << period << "," << d.id << ",,weight,*," << format_double(d.weight) << "\n";
      dump(period, d.id, "traffic", d.traffic);
      dump(period, d.id, "traffic_scale", d.traffic_scale);
      dump(period, d.id, "pv", d.pv);
      dump(period, d.id, "p_load", d.p_load);
      dump(period, d.id, "q_load", d.q_load);
      dump(period, d.id, "load_scale", d.load_scale);
    }
  }
}

}  // namespace fcsp
