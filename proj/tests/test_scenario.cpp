#include <gtest/gtest.h>

#include <sstream>

#include "fcsp/error.hpp"
#include "fcsp/log.hpp"
#include "fcsp/scenario.hpp"
#include "oracle.hpp"

using namespace fcsp;

namespace {

std::string day_rows(int day, double weight, const std::string& series = "traffic_scale", double v = 1.0) {
  std::ostringstream os;
  os << day << ",," << "weight,*," << weight << "\n";
  for (int h = 1; h <= 24; ++h) os << day << "," << h << "," << series << ",*," << v << "\n";
  return os.str();
}

}  // namespace

TEST(Support, DeterministicAndBounded) {
  const auto cfg = oracle::fixture("toy/config.json");
  const Instance& inst = cfg.instance;
  const auto a = generate_support(inst.coeffs, inst.diffusion, inst.ambiguity, inst.od_keys(), 5, 9);
  const auto b = generate_support(inst.coeffs, inst.diffusion, inst.ambiguity, inst.od_keys(), 5, 9);
  const auto c = generate_support(inst.coeffs, inst.diffusion, inst.ambiguity, inst.od_keys(), 5, 10);
  EXPECT_EQ(a.periods, b.periods);
  EXPECT_NE(a.periods, c.periods);
  ASSERT_EQ(a.periods.size(), 2u);
  for (const auto& per : a.periods) {
    ASSERT_EQ(per.size(), 5u);
    for (const auto& s : per)
      for (double th : s) {
        EXPECT_GE(th, 0.0);
        EXPECT_LE(th, 1.0);
      }
  }
}

TEST(Support, JsonRoundTrip) {
  const auto cfg = oracle::fixture("toy/config.json");
  std::stringstream ss;
  save_support_json(ss, cfg.instance.support);
  const auto back = load_support_json(ss);
  EXPECT_EQ(back.periods, cfg.instance.support.periods);
  EXPECT_EQ(back.od_keys, cfg.instance.support.od_keys);
  std::stringstream bad("{\"od_keys\": [\"1-4\"], \"periods\": [[[0.1, 0.2]]]}");
  EXPECT_THROW(load_support_json(bad), Error);
}

TEST(Days, ParseAndBroadcast) {
  std::stringstream ss("day,hour,series,key,value\n" + day_rows(1, 200) + day_rows(2, 165, "pv", 0.5));
  const auto days = parse_representative_days(ss, 2);
  ASSERT_EQ(days.size(), 2u);
  ASSERT_EQ(days[1].size(), 2u);
  EXPECT_DOUBLE_EQ(days[0][0].weight + days[0][1].weight, 365.0);
  EXPECT_DOUBLE_EQ((*find_profile(days[1][1].pv, "7"))[3], 0.5);
  EXPECT_EQ(find_profile(days[0][0].pv, "7"), nullptr);
}

TEST(Days, WeightsRescaledWithWarning) {
  std::vector<std::string> seen;
  auto old = set_warning_handler([&](const std::string& m) { seen.push_back(m); });
  std::stringstream ss("day,hour,series,key,value\n" + day_rows(1, 100) + day_rows(2, 100));
  const auto days = parse_representative_days(ss, 1);
  set_warning_handler(old);
  EXPECT_DOUBLE_EQ(days[0][0].weight, 182.5);
  EXPECT_EQ(seen.size(), 1u);
}

TEST(Days, SchemaErrors) {
  auto parse = [](const std::string& text) {
    std::stringstream ss(text);
    return parse_representative_days(ss, 1);
  };
  const std::string header = "day,hour,series,key,value\n";
  EXPECT_THROW(parse(header + "1,,weight,*,365\n1,0,traffic,*,1\n"), Error);            // hour 0
  EXPECT_THROW(parse(header + day_rows(1, 365, "pv", 1.5)), Error);                      // pv above 1
  EXPECT_THROW(parse(header + day_rows(1, 365, "bogus")), Error);                        // unknown series
  EXPECT_THROW(parse("day,hour,key,value\n"), Error);                                    // missing column
  EXPECT_THROW(parse(header + "1,,weight,*,365\n1,1,traffic,*,1\n"), Error);            // short profile
  EXPECT_THROW(parse(header + day_rows(1, 365, "traffic", std::nan(""))), Error);        // non-finite
}

TEST(Days, SaveReload) {
  const auto cfg = oracle::fixture("toy/config.json");
  std::stringstream ss;
  save_representative_days(ss, cfg.instance.days);
  const auto back = parse_representative_days(ss, 2);
  ASSERT_EQ(back.size(), cfg.instance.days.size());
  for (size_t g = 0; g < back.size(); ++g)
    for (size_t d = 0; d < back[g].size(); ++d) {
      EXPECT_DOUBLE_EQ(back[g][d].weight, cfg.instance.days[g][d].weight);
      EXPECT_EQ(back[g][d].traffic_scale, cfg.instance.days[g][d].traffic_scale);
    }
}
