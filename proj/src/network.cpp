#include "fcsp/network.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <queue>
#include <sstream>

#include "fcsp/error.hpp"
#include "fcsp/log.hpp"

namespace fcsp {

namespace {

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler h = [](const std::string& msg) {
    std::cerr << "warning: " << msg << "\n";
  };
  return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(warning_mutex());
  WarningHandler old = warning_handler();
  warning_handler() = std::move(handler);
  return old;
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoPath: return "NoPath";
    case ErrorKind::InfeasibleArc: return "InfeasibleArc";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::DegenerateSpread: return "DegenerateSpread";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::NonConcaveServiceCurve: return "NonConcaveServiceCurve";
    case ErrorKind::InfeasibleCoverage: return "InfeasibleCoverage";
    case ErrorKind::EmptyAmbiguitySet: return "EmptyAmbiguitySet";
    case ErrorKind::UnboundedDuals: return "UnboundedDuals";
    case ErrorKind::SolverUnavailable: return "SolverUnavailable";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::IterationLimit: return "IterationLimit";
    case ErrorKind::DualUnavailable: return "DualUnavailable";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SolverUnavailable:
    case ErrorKind::SolverFailure:
    case ErrorKind::IterationLimit:
    case ErrorKind::DualUnavailable:
    case ErrorKind::UnboundedDuals:
      return 3;
    case ErrorKind::NoPath:
    case ErrorKind::InfeasibleArc:
    case ErrorKind::InfeasibleCoverage:
    case ErrorKind::EmptyAmbiguitySet:
    case ErrorKind::Infeasible:
    case ErrorKind::EmptySupport:
      return 4;
    default:
      return 2;
  }
}

TransportNetwork::TransportNetwork(std::vector<NodeId> nodes, std::vector<Arc> arcs,
                                   std::set<NodeId> candidates)
    : nodes_(std::move(nodes)), arcs_(std::move(arcs)), candidates_(std::move(candidates)) {
  for (NodeId n : nodes_) {
    if (!adjacency_.emplace(n, std::vector<Arc>{}).second)
      throw Error(ErrorKind::SchemaError, "duplicate TN node " + std::to_string(n));
  }
  for (const Arc& a : arcs_) {
    if (!(a.length > 0.0) || !std::isfinite(a.length))
      throw Error(ErrorKind::SchemaError, "TN arc length must be positive and finite");
    if (a.from == a.to) throw Error(ErrorKind::SchemaError, "TN self loop");
    auto it = adjacency_.find(a.from);
    if (it == adjacency_.end() || !adjacency_.count(a.to))
      throw Error(ErrorKind::SchemaError, "TN arc references unknown node");
    it->second.push_back(a);
  }
  for (NodeId c : candidates_) {
    if (!adjacency_.count(c))
      throw Error(ErrorKind::SchemaError, "candidate flag on unknown TN node");
  }
  for (auto& [n, out] : adjacency_) {
    std::sort(out.begin(), out.end(),
              [](const Arc& a, const Arc& b) { return a.to < b.to; });
  }
}

TransportNetwork TransportNetwork::from_edges(std::vector<NodeId> nodes,
                                              const std::vector<Arc>& edges,
                                              std::set<NodeId> candidates) {
  std::vector<Arc> arcs;
  arcs.reserve(edges.size() * 2);
  for (const Arc& e : edges) {
    arcs.push_back(e);
    arcs.push_back(Arc{e.to, e.from, e.length});
  }
  return TransportNetwork(std::move(nodes), std::move(arcs), std::move(candidates));
}

const std::vector<Arc>& TransportNetwork::out_arcs(NodeId n) const {
  auto it = adjacency_.find(n);
  if (it == adjacency_.end())
    throw Error(ErrorKind::InvalidParams, "unknown TN node " + std::to_string(n));
  return it->second;
}

std::optional<double> TransportNetwork::arc_length(NodeId from, NodeId to) const {
  auto it = adjacency_.find(from);
  if (it == adjacency_.end()) return std::nullopt;
  std::optional<double> best;
  for (const Arc& a : it->second) {
    if (a.to == to && (!best || a.length < *best)) best = a.length;
  }
  return best;
}

std::string OdPair::key() const {
  return std::to_string(origin) + "-" + std::to_string(destination);
}

OdPair make_od_pair(const TransportNetwork& tn, const std::vector<NodeId>& path) {
  if (path.size() < 2) throw Error(ErrorKind::InvalidParams, "path needs two nodes");
  OdPair od;
  od.origin = path.front();
  od.destination = path.back();
  od.path_nodes = path;
  std::vector<Arc> forward;
  for (size_t p = 0; p + 1 < path.size(); ++p) {
    auto len = tn.arc_length(path[p], path[p + 1]);
    if (!len) throw Error(ErrorKind::NoPath, "path uses a missing arc");
    forward.push_back(Arc{path[p], path[p + 1], *len});
    od.length += *len;
  }
  od.round_trip_arcs = forward;
  for (size_t p = path.size() - 1; p > 0; --p) {
    auto len = tn.arc_length(path[p], path[p - 1]);
    if (!len) throw Error(ErrorKind::NoPath, "return path uses a missing arc");
    od.round_trip_arcs.push_back(Arc{path[p], path[p - 1], *len});
  }
  return od;
}

OdPair shortest_path(const TransportNetwork& tn, NodeId origin, NodeId destination) {
  if (origin == destination)
    throw Error(ErrorKind::InvalidParams, "origin equals destination");
  if (!tn.has_node(origin) || !tn.has_node(destination))
    throw Error(ErrorKind::InvalidParams, "OD endpoint not in network");

  struct Label {
    double dist;
    std::vector<NodeId> seq;
  };
  auto better = [](const Label& a, const Label& b) {
    double tol = 1e-9 * std::max(1.0, std::max(std::abs(a.dist), std::abs(b.dist)));
    if (a.dist < b.dist - tol) return true;
    if (a.dist > b.dist + tol) return false;
    return a.seq < b.seq;
  };
  std::map<NodeId, Label> best;
  std::set<NodeId> done;
  best[origin] = Label{0.0, {origin}};
  while (true) {
    const Label* pick = nullptr;
    NodeId pick_node = 0;
    for (const auto& [n, lab] : best) {
      if (done.count(n)) continue;
      if (!pick || better(lab, *pick)) {
        pick = &lab;
        pick_node = n;
      }
    }
    if (!pick) break;
    done.insert(pick_node);
    if (pick_node == destination) break;
    Label cur = *pick;
    for (const Arc& a : tn.out_arcs(pick_node)) {
      if (done.count(a.to)) continue;
      Label cand{cur.dist + a.length, cur.seq};
      cand.seq.push_back(a.to);
      auto it = best.find(a.to);
      if (it == best.end() || better(cand, it->second)) best[a.to] = std::move(cand);
    }
  }
  auto it = best.find(destination);
  if (it == best.end() || !done.count(destination))
    throw Error(ErrorKind::NoPath, "no path " + std::to_string(origin) + " -> " +
                                       std::to_string(destination));
  return make_od_pair(tn, it->second.seq);
}

OdCoverage generate_coverage_sets(const TransportNetwork& tn, const OdPair& od,
                                  double driving_range, double reserve) {
  if (!(driving_range > 0.0)) throw Error(ErrorKind::InvalidParams, "driving range must be positive");
  if (reserve < 0.0 || reserve >= 1.0) throw Error(ErrorKind::InvalidParams, "reserve must be in [0,1)");
  const auto& path = od.path_nodes;
  const size_t n = path.size();
  if (n < 2 || od.round_trip_arcs.size() != 2 * (n - 1))
    throw Error(ErrorKind::InvalidParams, "OD pair has no round trip");
  const double usable = driving_range * (1.0 - reserve);
  const double tol = 1e-9 * std::max(1.0, usable);

  // cum[p]: one-way distance from the origin to path position p.
  std::vector<double> cum(n, 0.0);
  for (size_t p = 1; p < n; ++p) cum[p] = cum[p - 1] + od.round_trip_arcs[p - 1].length;
  const double total = cum[n - 1];

  OdCoverage out;
  out.reserve(2 * (n - 1));
  for (size_t m = 0; m < 2 * (n - 1); ++m) {
    CoverageEntry entry;
    entry.arc = od.round_trip_arcs[m];
    const bool forward = m < n - 1;
    for (size_t q = 0; q < n; ++q) {
      if (!tn.is_candidate(path[q])) continue;
      bool covered = false;
      if (forward) {
        const size_t k = m + 1;  // arc (k-1 -> k)
        if (q < k) {
          covered = cum[k] - cum[q] <= usable + tol;
        } else {
          // recharged on the previous return leg, wrapping through the origin
          covered = cum[q] + cum[k] <= usable + tol;
        }
      } else {
        const size_t j = 2 * (n - 1) - m - 1;  // arc (j+1 -> j)
        if (q > j) {
          covered = cum[q] - cum[j] <= usable + tol;
        } else {
          // recharged on the outbound leg, wrapping through the destination
          covered = (total - cum[q]) + (total - cum[j]) <= usable + tol;
        }
      }
      if (covered) entry.nodes.push_back(path[q]);
    }
    std::sort(entry.nodes.begin(), entry.nodes.end());
    entry.nodes.erase(std::unique(entry.nodes.begin(), entry.nodes.end()), entry.nodes.end());
    if (entry.nodes.empty()) {
      std::ostringstream msg;
      msg << "arc (" << entry.arc.from << "," << entry.arc.to << ") of OD " << od.key()
          << " has no covering candidate within range " << usable;
      throw Error(ErrorKind::InfeasibleArc, msg.str());
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<OdPair> filter_od_pairs(const std::vector<OdPair>& ods, double driving_range,
                                    double recharge_threshold) {
  if (!(driving_range > 0.0)) throw Error(ErrorKind::InvalidParams, "driving range must be positive");
  if (!(recharge_threshold > 0.0) || recharge_threshold > 1.0)
    throw Error(ErrorKind::InvalidParams, "recharge threshold must be in (0,1]");
  std::vector<OdPair> kept;
  for (const OdPair& od : ods) {
    if (2.0 * od.length > (1.0 - recharge_threshold) * driving_range) kept.push_back(od);
  }
  return kept;
}

DistributionNetwork::DistributionNetwork(std::vector<DnNode> nodes, std::vector<DnLine> lines,
                                         int root, double base_mva, double root_u_sqr)
    : nodes_(std::move(nodes)), root_(root), base_mva_(base_mva), root_u_sqr_(root_u_sqr) {
  if (!(base_mva_ > 0.0)) throw Error(ErrorKind::SchemaError, "DN base_mva must be positive");
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const DnNode& nd = nodes_[i];
    if (!index_.emplace(nd.id, static_cast<int>(i)).second)
      throw Error(ErrorKind::SchemaError, "duplicate DN node " + std::to_string(nd.id));
    if (!(nd.u_sqr_min < nd.u_sqr_max))
      throw Error(ErrorKind::SchemaError, "DN voltage limits must satisfy min < max");
  }
  if (!index_.count(root_)) throw Error(ErrorKind::SchemaError, "DN root not a node");
  if (lines.size() + 1 != nodes_.size())
    throw Error(ErrorKind::SchemaError, "DN must be radial: |lines| = |nodes| - 1");
  for (const DnLine& l : lines) {
    if (!index_.count(l.from) || !index_.count(l.to))
      throw Error(ErrorKind::SchemaError, "DN line references unknown node");
    if (l.r_pu < 0.0 || l.x_pu < 0.0) throw Error(ErrorKind::SchemaError, "DN impedance must be >= 0");
  }
  // Orient lines away from the root by breadth-first search.
  std::vector<bool> used(lines.size(), false);
  std::set<int> reached{root_};
  std::queue<int> frontier;
  frontier.push(root_);
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    for (size_t e = 0; e < lines.size(); ++e) {
      if (used[e]) continue;
      DnLine l = lines[e];
      if (l.to == u) std::swap(l.from, l.to);
      if (l.from != u) continue;
      if (reached.count(l.to)) throw Error(ErrorKind::SchemaError, "DN contains a cycle");
      used[e] = true;
      reached.insert(l.to);
      lines_.push_back(l);
      frontier.push(l.to);
    }
  }
  if (reached.size() != nodes_.size())
    throw Error(ErrorKind::SchemaError, "DN is not connected");
}

int DistributionNetwork::node_index(int id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorKind::SchemaError, "unknown DN node " + std::to_string(id));
  return it->second;
}

std::vector<int> DistributionNetwork::expandable_lines() const {
  std::vector<int> out;
  for (size_t e = 0; e < lines_.size(); ++e)
    if (lines_[e].expandable) out.push_back(static_cast<int>(e));
  return out;
}

int CouplingMap::dn_of(NodeId tn) const {
  auto it = tn_to_dn.find(tn);
  if (it == tn_to_dn.end())
    throw Error(ErrorKind::SchemaError, "TN node " + std::to_string(tn) + " has no coupling");
  return it->second;
}

double CouplingMap::initial_substation(NodeId tn) const {
  auto it = substation_mw.find(tn);
  return it == substation_mw.end() ? 0.0 : it->second;
}

}  // namespace fcsp
