#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ariel/relation_engine.hpp"
#include "ariel/topology.hpp"

namespace ariel {

/// One entity->destination connection. Flows live in slot arrays; an
/// inactive slot keeps its id but carries no traffic.
struct Flow {
  FlowId id;
  EntityId origin;
  NodeId src;  // home node of the origin entity
  NodeId dst;
  Bandwidth bandwidth = 0.0;
  Step birth = 0;
  bool active = false;

  NodePair pair() const { return {src, dst}; }
};

/// Aggregate demand per ordered node pair; zero entries are omitted.
struct TrafficMatrix {
  std::map<NodePair, Bandwidth> demand;
};

TrafficMatrix aggregate_demand(std::span<const Flow> flows);

/// Alternatives actually usable per pair, after pins are applied.
using RouteTable = std::map<NodePair, std::vector<Path>>;

/// Per pair, the fraction of its demand sent over each alternative.
struct LoadFractions {
  std::map<NodePair, std::vector<double>> fractions;
  double utilization = 0.0;  // max over links of load / capacity
  bool saturated = false;    // utilization > 1
};

struct LpOptions {
  /// Extra per-(pair, path) cost added to the hop-count tie-break.
  std::map<NodePair, std::vector<double>> path_penalty;
};

/// Min-max utilization: minimize U subject to per-pair fractions summing to
/// one and every link carrying at most U times its capacity. Among optimal
/// solutions, shorter paths (plus any penalty) are preferred.
LoadFractions solve_load_fractions(const Topology& topo, const RouteTable& routes, const TrafficMatrix& demand,
                                   const LpOptions& opts = {});
LoadFractions solve_load_fractions(const Topology& topo, const PathSet& paths, const TrafficMatrix& demand);

/// Per-link load implied by fractions (load of a pair split over its paths).
std::vector<Bandwidth> fractional_link_loads(const Topology& topo, const RouteTable& routes,
                                             const TrafficMatrix& demand, const LoadFractions& f);

/// Per pin, the links it stands in for: a path is switched onto the pin of
/// (u, destination) only if it was about to leave u over one of them. A pin
/// without triggers captures every path through u.
using PinTriggers = std::map<NodePair, std::set<LinkId>>;

/// Routing tables: per-flow path index into the effective paths of its pair,
/// pinned single-path tunnels toward implicated targets, and the primary
/// path index per pair used for flows created between re-routes.
struct RoutingConfig {
  std::map<NodePair, Path> pins;
  PinTriggers pin_triggers;
  std::vector<std::int32_t> path_index;  // by FlowId; -1 = unassigned
  std::map<NodePair, std::size_t> primary;
  Step epoch = 0;
  std::vector<std::string> diagnostics;
};

/// Follows `base` hop by hop toward its last node, switching onto the pin
/// of (u, destination) at the first node u that has one. Loops created by
/// the switch are cut out.
Path apply_pins(const Topology& topo, const Path& base, const std::map<NodePair, Path>& pins,
                const PinTriggers* triggers = nullptr);

/// Effective alternatives of every pair under the given pins, with exact
/// duplicates removed. A pinned pair has its pin as the only alternative.
/// With `reserve`, a pair whose destination a pin path never visits avoids
/// that path's links when one of its alternatives can.
RouteTable effective_routes(const Topology& topo, const PathSet& paths, const std::map<NodePair, Path>& pins,
                            const PinTriggers* triggers = nullptr, bool reserve = false);

/// Effective alternatives for one pair (empty for self pairs).
std::vector<Path> effective_paths(const Topology& topo, const PathSet& paths, const std::map<NodePair, Path>& pins,
                                  NodePair pair, const PinTriggers* triggers = nullptr, bool reserve = false);

/// Path of an active flow under `routing`. Throws Error(Consistency) when
/// the flow has no valid assignment.
const Path& flow_path(const RouteTable& routes, const RoutingConfig& routing, const Flow& flow);

/// Sum of flow bandwidths per link.
std::vector<Bandwidth> link_loads(const Topology& topo, std::span<const Flow> flows, const RouteTable& routes,
                                  const RoutingConfig& routing);

/// Samples a path per flow from the fractions, correcting greedily so each
/// path ends within one flow's bandwidth of its share. `pins` are carried
/// into the result.
RoutingConfig map_flows_random(std::span<const Flow> flows, const RouteTable& routes, const LoadFractions& fractions,
                               std::uint64_t seed, const std::map<NodePair, Path>& pins = {});

/// Laplace-smoothed destination frequencies per entity.
class DestinationModel {
 public:
  explicit DestinationModel(std::size_t node_count = 0) : node_count_(node_count) {}

  void observe(EntityId e, NodeId destination);
  double probability(EntityId e, NodeId destination) const;
  double unseen_mass(EntityId e) const;
  std::size_t history_length(EntityId e) const;
  std::size_t node_count() const { return node_count_; }

 private:
  struct History {
    std::map<NodeId, std::uint64_t> counts;
    std::uint64_t total = 0;
  };
  std::size_t node_count_;
  std::map<EntityId, History> hist_;
};

/// Appends the current destination of every active flow to its origin's history.
void update_destination_model(DestinationModel& model, std::span<const Flow> flows);

/// Inputs for choosing the pinned tunnels of the detection-optimal mapping.
struct PinRequest {
  FloodObservation observation;          // shadow-filtered flooded links at t
  std::vector<NodeId> implicated_nodes;  // top-x *->n targets
  std::set<EntityId> suspects;           // origins in detected relations
};

struct PinCandidate {
  Path path;
  std::size_t overlap = 0;         // suspicious flows on the path's links
  std::size_t closeness = 0;       // summed distance of shared links from the nearer end
  double destination_mass = 0.0;   // sum over intermediate nodes
};

/// Ranks candidate tunnels for one pair: fewest links shared with
/// suspicious traffic, shared links nearest the ends, least likely
/// intermediate destinations, fewest hops, then link ids.
std::vector<PinCandidate> rank_pin_candidates(const Topology& topo, const PathSet& paths, NodePair pair,
                                              const std::vector<std::uint32_t>& suspicious_flows_per_link,
                                              const std::set<EntityId>& implicated, const DestinationModel& model);

/// One pin per (s(l), n) for each flooded link l and implicated node n
/// served by it. Pairs without any candidate are reported in `diagnostics`;
/// `triggers` receives the flooded links each pin stands in for.
std::map<NodePair, Path> plan_pins(const Topology& topo, const PathSet& paths, std::span<const Flow> flows,
                                   const RouteTable& current_routes, const RoutingConfig& current,
                                   const PinRequest& request, const DestinationModel& model,
                                   std::vector<std::string>* diagnostics = nullptr, PinTriggers* triggers = nullptr);

/// Flows of suspicious origins go to the paths sharing fewest links with
/// the pins first, within each path's share; everything else is mapped as
/// in map_flows_random.
RoutingConfig map_flows_optimal(std::span<const Flow> flows, const Topology& topo, const RouteTable& routes,
                                const LoadFractions& fractions, const std::map<NodePair, Path>& pins,
                                const std::set<EntityId>& suspects, std::uint64_t seed);

/// Everything one re-route produces.
struct TeResult {
  RoutingConfig routing;
  LoadFractions fractions;
  RouteTable routes;
};

/// Stage 1 + random stage 2 over the unpinned path set.
TeResult reroute_random(const Topology& topo, const PathSet& paths, std::span<const Flow> flows, std::uint64_t seed);

/// Plans pins from the flood observation (kept on top of the current ones),
/// solves the load fractions over the pinned routes, then maps the flows.
TeResult reroute_optimal(const Topology& topo, const PathSet& paths, std::span<const Flow> flows,
                         const RoutingConfig& current, const PinRequest& request, const DestinationModel& model,
                         std::uint64_t seed);

/// Convenience form of reroute_optimal returning the routing tables only.
RoutingConfig map_flows_optimal(const Topology& topo, const PathSet& paths, std::span<const Flow> flows,
                                const RoutingConfig& current, const PinRequest& request,
                                const DestinationModel& model, std::uint64_t seed);

/// LP penalty steering suspicious demand away from paths that share links
/// with pins.
std::map<NodePair, std::vector<double>> pin_overlap_penalty(const Topology& topo, const RouteTable& routes,
                                                            const std::map<NodePair, Path>& pins,
                                                            std::span<const Flow> flows,
                                                            const std::set<EntityId>& suspects);

}  // namespace ariel
