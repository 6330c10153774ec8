#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "fcsp/error.hpp"
#include "fcsp/network.hpp"
#include "oracle.hpp"

using namespace fcsp;

namespace {

TransportNetwork line_network(const std::vector<double>& lengths, std::set<NodeId> candidates = {}) {
  std::vector<NodeId> nodes;
  std::vector<Arc> edges;
  for (size_t i = 0; i <= lengths.size(); ++i) nodes.push_back(static_cast<NodeId>(i + 1));
  for (size_t i = 0; i < lengths.size(); ++i)
    edges.push_back({static_cast<NodeId>(i + 1), static_cast<NodeId>(i + 2), lengths[i]});
  if (candidates.empty()) candidates.insert(nodes.begin(), nodes.end());
  return TransportNetwork::from_edges(nodes, edges, candidates);
}

std::set<NodeId> as_set(const std::vector<NodeId>& v) { return {v.begin(), v.end()}; }

const CoverageEntry& entry(const OdCoverage& cov, NodeId from, NodeId to) {
  for (const auto& e : cov)
    if (e.arc.from == from && e.arc.to == to) return e;
  throw std::runtime_error("arc not found");
}

}  // namespace

TEST(ShortestPath, FourNodeLine) {
  const auto tn = line_network({30, 45, 40});
  const OdPair od = shortest_path(tn, 1, 4);
  EXPECT_EQ(od.path_nodes, (std::vector<NodeId>{1, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(od.length, 115.0);
  ASSERT_EQ(od.round_trip_arcs.size(), 6u);
  EXPECT_EQ(od.round_trip_arcs[3].from, 4);
  EXPECT_EQ(od.round_trip_arcs[5].to, 1);
}

TEST(ShortestPath, TwoNodes) {
  const auto tn = line_network({12});
  EXPECT_EQ(shortest_path(tn, 1, 2).path_nodes, (std::vector<NodeId>{1, 2}));
}

TEST(ShortestPath, GridTiesMatchExhaustiveSearch) {
  // 3x3 grid with unit lengths has many equal-length paths between corners.
  std::vector<NodeId> nodes;
  std::vector<Arc> edges;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const int id = r * 3 + c + 1;
      nodes.push_back(id);
      if (c < 2) edges.push_back({id, id + 1, 1.0});
      if (r < 2) edges.push_back({id, id + 3, 1.0});
    }
  const auto tn = TransportNetwork::from_edges(nodes, edges, {});
  for (NodeId o : nodes)
    for (NodeId d : nodes) {
      if (o == d) continue;
      // Exhaustive simple-path enumeration, then (length, sequence) minimum.
      std::pair<double, std::vector<NodeId>> best{1e18, {}};
      std::vector<NodeId> path{o};
      std::function<void(double)> dfs = [&](double len) {
        if (path.back() == d) {
          best = std::min(best, std::make_pair(len, path));
          return;
        }
        for (const Arc& a : tn.out_arcs(path.back())) {
          if (std::find(path.begin(), path.end(), a.to) != path.end()) continue;
          path.push_back(a.to);
          dfs(len + a.length);
          path.pop_back();
        }
      };
      dfs(0.0);
      EXPECT_EQ(shortest_path(tn, o, d).path_nodes, best.second) << o << "->" << d;
    }
}

TEST(ShortestPath, Disconnected) {
  const auto tn = TransportNetwork::from_edges({1, 2, 3}, {{1, 2, 5.0}}, {});
  try {
    shortest_path(tn, 1, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoPath);
  }
}

TEST(Coverage, WorkedExample) {
  const auto tn = line_network({30, 45, 40});
  const auto cov = generate_coverage_sets(tn, shortest_path(tn, 1, 4), 100.0);
  EXPECT_EQ(as_set(entry(cov, 3, 4).nodes), (std::set<NodeId>{2, 3}));
  EXPECT_EQ(as_set(entry(cov, 3, 2).nodes), (std::set<NodeId>{3, 4}));
}

TEST(Coverage, SingleShortArcIsCoveredFromUpstream) {
  // Range below the round trip, so only the origin can cover the outbound arc.
  const auto tn = line_network({60});
  const auto cov = generate_coverage_sets(tn, shortest_path(tn, 1, 2), 100.0);
  EXPECT_EQ(as_set(entry(cov, 1, 2).nodes), (std::set<NodeId>{1}));
}

TEST(Coverage, ArcLongerThanRange) {
  const auto tn = line_network({30, 120});
  try {
    generate_coverage_sets(tn, shortest_path(tn, 1, 3), 100.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleArc);
  }
}

TEST(Coverage, RandomPathsMatchSimulation) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> len(10.0, 70.0);
  std::bernoulli_distribution cand(0.7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6);
    std::vector<double> lengths;
    for (int i = 0; i + 1 < n; ++i) lengths.push_back(len(rng));
    std::set<NodeId> c;
    for (int i = 1; i <= n; ++i)
      if (cand(rng)) c.insert(i);
    if (c.empty()) c.insert(1);
    const auto tn = line_network(lengths, c);
    const OdPair od = shortest_path(tn, 1, n);
    const auto expected = oracle::coverage_by_simulation(tn, od, 150.0);
    bool infeasible = false;
    for (const auto& s : expected) infeasible = infeasible || s.empty();
    if (infeasible) {
      EXPECT_THROW(generate_coverage_sets(tn, od, 150.0), Error);
      continue;
    }
    const auto cov = generate_coverage_sets(tn, od, 150.0);
    ASSERT_EQ(cov.size(), expected.size());
    for (size_t a = 0; a < cov.size(); ++a) EXPECT_EQ(as_set(cov[a].nodes), expected[a]) << "trial " << trial;
  }
}

TEST(Coverage, PalindromicPathMirrors) {
  const auto tn = line_network({40, 30, 40});
  const auto cov = generate_coverage_sets(tn, shortest_path(tn, 1, 4), 100.0);
  // Reversing node labels (i -> 5 - i) maps the forward half onto the backward half.
  for (size_t m = 0; m < 3; ++m) {
    std::set<NodeId> mirrored;
    for (NodeId n : cov[m].nodes) mirrored.insert(5 - n);
    EXPECT_EQ(mirrored, as_set(cov[3 + m].nodes));
  }
}

TEST(Filter, ShortPairsDropped) {
  const auto tn = line_network({100, 200});
  const std::vector<OdPair> ods{shortest_path(tn, 1, 2), shortest_path(tn, 1, 3)};
  const auto kept = filter_od_pairs(ods, 360.0, 0.2);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].destination, 3);
  EXPECT_EQ(filter_od_pairs(ods, 360.0, 1.0).size(), 2u);
}

TEST(DistributionNetworkTest, RejectsCycle) {
  std::vector<DnNode> nodes{{0}, {1}, {2}};
  for (auto& n : nodes) n.p_load_mw = 0.1;
  nodes[0].id = 0;
  nodes[1].id = 1;
  nodes[2].id = 2;
  DnLine a{0, 1, 0.01, 0.02, 1, 1}, b{1, 2, 0.01, 0.02, 1, 1}, c{2, 0, 0.01, 0.02, 1, 1};
  EXPECT_THROW(DistributionNetwork(nodes, {a, b, c}, 0, 10.0), Error);
  // Line given against the root direction gets reoriented.
  DnLine rev{1, 0, 0.01, 0.02, 1, 1};
  const DistributionNetwork ok(nodes, {rev, b}, 0, 10.0);
  EXPECT_EQ(ok.lines()[0].from, 0);
  EXPECT_EQ(ok.lines()[0].to, 1);
}
