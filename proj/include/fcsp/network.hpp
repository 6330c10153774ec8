#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fcsp {

using NodeId = int;

struct Arc {
  NodeId from = 0;
  NodeId to = 0;
  double length = 0.0;  // miles

  bool operator==(const Arc& o) const { return from == o.from && to == o.to; }
};

// Directed transportation graph. Undirected inputs are expanded with from_edges.
class TransportNetwork {
 public:
  TransportNetwork() = default;
  TransportNetwork(std::vector<NodeId> nodes, std::vector<Arc> arcs,
                   std::set<NodeId> candidates);

  static TransportNetwork from_edges(std::vector<NodeId> nodes,
                                     const std::vector<Arc>& edges,
                                     std::set<NodeId> candidates);

  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<Arc>& out_arcs(NodeId n) const;
  bool has_node(NodeId n) const { return adjacency_.count(n) > 0; }
  bool is_candidate(NodeId n) const { return candidates_.count(n) > 0; }
  const std::set<NodeId>& candidates() const { return candidates_; }
  std::optional<double> arc_length(NodeId from, NodeId to) const;

 private:
  std::vector<NodeId> nodes_;
  std::vector<Arc> arcs_;
  std::set<NodeId> candidates_;
  std::map<NodeId, std::vector<Arc>> adjacency_;
};

struct OdPair {
  NodeId origin = 0;
  NodeId destination = 0;
  std::vector<NodeId> path_nodes;
  std::vector<Arc> round_trip_arcs;  // forward arcs then the reversed ones
  double length = 0.0;               // one-way miles

  std::string key() const;
};

// Builds an OdPair from an explicit node sequence.
OdPair make_od_pair(const TransportNetwork& tn, const std::vector<NodeId>& path);

// Minimum-length path; ties go to the lexicographically smallest node sequence.
OdPair shortest_path(const TransportNetwork& tn, NodeId origin, NodeId destination);

struct CoverageEntry {
  Arc arc;
  std::vector<NodeId> nodes;  // sorted ascending
};

// One entry per arc of the round trip, in round-trip order.
using OdCoverage = std::vector<CoverageEntry>;

// Candidate nodes that can recharge an EV so it reaches the end of each
// round-trip arc. `reserve` is the fraction of range kept in the battery on
// arrival (0 uses the full range).
OdCoverage generate_coverage_sets(const TransportNetwork& tn, const OdPair& od,
                                  double driving_range, double reserve = 0.0);

// Drops pairs whose round trip from a full battery never goes below the
// recharge threshold: 2 * length <= (1 - threshold) * range.
std::vector<OdPair> filter_od_pairs(const std::vector<OdPair>& ods,
                                    double driving_range,
                                    double recharge_threshold);

struct DnNode {
  int id = 0;
  double u_sqr_min = 0.9025;
  double u_sqr_max = 1.1025;
  double p_load_mw = 0.0;   // base value, overridden by day profiles
  double q_load_mvar = 0.0;
};

struct DnLine {
  int from = 0;  // parent side after orientation
  int to = 0;
  double r_pu = 0.0;
  double x_pu = 0.0;
  double p_max_mw = 0.0;
  double q_max_mvar = 0.0;
  bool expandable = false;
  double length_km = 0.0;
  double p_expansion_mw = 0.0;
  double q_expansion_mvar = 0.0;
};

// Radial distribution network. Lines are oriented away from the root.
class DistributionNetwork {
 public:
  DistributionNetwork() = default;
  DistributionNetwork(std::vector<DnNode> nodes, std::vector<DnLine> lines,
                      int root, double base_mva, double root_u_sqr = 1.0);

  const std::vector<DnNode>& nodes() const { return nodes_; }
  const std::vector<DnLine>& lines() const { return lines_; }
  int root() const { return root_; }
  double base_mva() const { return base_mva_; }
  double root_u_sqr() const { return root_u_sqr_; }
  int node_index(int id) const;
  std::vector<int> expandable_lines() const;

 private:
  std::vector<DnNode> nodes_;
  std::vector<DnLine> lines_;
  int root_ = 0;
  double base_mva_ = 1.0;
  double root_u_sqr_ = 1.0;
  std::map<int, int> index_;
};

struct CouplingMap {
  std::map<NodeId, int> tn_to_dn;
  std::map<NodeId, double> substation_mw;  // initial FCS substation capacity

  int dn_of(NodeId tn) const;
  double initial_substation(NodeId tn) const;
};

}  // namespace fcsp
