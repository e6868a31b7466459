#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "ariel/random.hpp"
#include "ariel/te_engine.hpp"

namespace ariel {

enum class EntityKind { Bot, Benign };
enum class AttackMode { Vertical, HorizontalEfferent, HorizontalAfferent };
enum class Popularity { Uniform, Zipf };

struct Entity {
  EntityId id;
  NodeId home;
  EntityKind kind = EntityKind::Benign;  // ground truth, read by metrics only
};

/// Entities plus their connection slots. Flow id = entity id * max_conns + slot.
class Population {
 public:
  Population() = default;
  Population(const Topology& topo, std::size_t bots, std::size_t benign, std::size_t max_conns, Rng& rng);

  std::span<const Entity> entities() const { return entities_; }
  std::span<const Flow> flows() const { return flows_; }
  std::span<Flow> flows() { return flows_; }
  std::size_t max_conns() const { return max_conns_; }
  const Entity& entity(EntityId e) const { return entities_.at(e.value); }
  std::span<const Flow> flows_of(EntityId e) const;
  std::size_t active_flows(EntityId e) const;
  std::size_t bot_count() const { return bots_; }

  /// Activates a free slot of `e`; returns the flow, or nullptr when all slots are busy.
  Flow* open_flow(EntityId e, NodeId dst, Bandwidth bw, Step now);

 private:
  std::vector<Entity> entities_;
  std::vector<Flow> flows_;
  std::size_t max_conns_ = 0;
  std::size_t bots_ = 0;
};

/// What the attacker sees: routes, routing tables and per-link loads.
/// A private copy, so the attacker cannot disturb the network.
struct LinkMap {
  RouteTable routes;
  RoutingConfig routing;
  std::vector<Bandwidth> loads;
};

LinkMap attacker_observe(const RouteTable& routes, const RoutingConfig& routing, const std::vector<Bandwidth>& loads);

struct AttackPlan {
  NodeId origin;
  NodeId target;
  AttackMode mode = AttackMode::Vertical;
  std::size_t budget = 0;  // max target links, 0 = no limit
  bool any_path = false;   // decoys may use any deployed path, not only the primary
  std::vector<LinkId> target_links;
  std::set<NodeId> decoys;
};

/// Target links on the routes from the attack origin to the target. On
/// each route the least-defended link is taken (vertical), or the link just
/// before it (efferent, farther from the target) or just after it
/// (afferent). Least defended means the smallest remaining headroom per
/// unit of bandwidth the bots can bring (`attack_power`, by LinkId); without
/// that estimate it is simply the most utilized link.
std::vector<LinkId> select_target_links(const Topology& topo, const LinkMap& view, NodeId origin, NodeId target,
                                        AttackMode mode, std::size_t budget = 0,
                                        const std::vector<Bandwidth>* attack_power = nullptr,
                                        double threshold = 1.0);

/// Bandwidth the bots could put on each link next wave: idle slots plus the
/// reusable share of active flows, of bots homed where some decoy's primary
/// route crosses the link. Links off the origin->target routes get 0.
std::vector<Bandwidth> attack_power(const Population& pop, const Topology& topo, const LinkMap& view, NodeId origin,
                                    NodeId target, double reuse_ratio, Bandwidth flow_bw, bool any_path = false);

struct WaveResult {
  std::vector<FlowId> changed;  // retargeted or newly opened, birth = now
  std::size_t retargeted = 0;
  std::size_t opened = 0;
};

/// Everything the wave and the benign step need to place a flow.
struct NetworkView {
  const Topology& topo;
  const RouteTable& routes;
  RoutingConfig& routing;
  std::vector<Bandwidth>& loads;
};

/// Assigns path `k` of the pair (default: its primary) to `f` and adds its load.
void route_new_flow(NetworkView& net, const Flow& f, std::optional<std::size_t> k = std::nullopt);
/// Removes the load of `f` from its current path.
void unroute_flow(NetworkView& net, const Flow& f);

/// One attack wave. Retargets reuse_ratio percent of active bot flows
/// toward decoys behind the target links, then fills idle bot slots until
/// every target link reaches threshold * capacity or no bot can help.
/// Fills plan.decoys with the decoys actually used.
WaveResult launch_wave(Population& pop, NetworkView& net, AttackPlan& plan, double reuse_ratio, Bandwidth flow_bw,
                       double threshold, Step now, Rng& rng);

/// Every benign entity opens max_conns flows.
void init_benign(Population& pop, NetworkView& net, Popularity popularity, double zipf_s, Bandwidth flow_bw,
                 Step now, Rng& rng);

/// rehome_ratio percent of active benign flows move to a uniform random node.
std::vector<FlowId> benign_step(Population& pop, NetworkView& net, double rehome_ratio, Step now, Rng& rng);

struct Decoy {
  NodeId node;
  std::size_t path = 0;  // index into the pair's routes
};

/// Decoy destinations per (home node, link): nodes m whose primary route
/// from home traverses the link, or any deployed route when `any_path`.
class DecoyIndex {
 public:
  DecoyIndex(const Topology& topo, const RouteTable& routes, const RoutingConfig& routing, NodeId target,
             std::span<const LinkId> links, bool any_path = false);
  const std::vector<Decoy>& decoys(NodeId home, LinkId link) const;
  bool reachable(NodeId home, LinkId link) const { return !decoys(home, link).empty(); }

 private:
  std::size_t nodes_;
  std::vector<LinkId> links_;
  std::vector<std::vector<Decoy>> table_;  // [home * links + i]
};

/// Idle slots of bots that can reach at least one of the target links.
std::size_t usable_spare_slots(const Population& pop, const DecoyIndex& index, std::span<const LinkId> links);

/// floor(ratio percent of n), robust to ratios like 10 of 10000.
std::size_t percent_of(double ratio, std::size_t n);

}  // namespace ariel
