#include "ariel/actors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace ariel {

namespace {

// Same tolerance as flood detection, so a wave stops exactly when the
// detector would call the link flooded.
bool below_flood(Bandwidth load, Bandwidth capacity, double threshold) {
  return load < threshold * capacity * (1.0 - 1e-12);
}

std::size_t primary_index(const RoutingConfig& routing, NodePair pair, std::size_t alternatives) {
  auto it = routing.primary.find(pair);
  std::size_t k = it == routing.primary.end() ? 0 : it->second;
  return k < alternatives ? k : 0;
}

NodeId uniform_other_node(std::size_t nodes, NodeId home, Rng& rng) {
  auto v = static_cast<std::uint32_t>(rng.below(nodes - 1));
  if (v >= home.value) ++v;
  return NodeId{v};
}

}  // namespace

std::size_t percent_of(double ratio, std::size_t n) {
  if (ratio <= 0.0 || n == 0) return 0;
  double v = std::floor(ratio * static_cast<double>(n) / 100.0 + 1e-9);
  return std::min(n, static_cast<std::size_t>(v));
}

Population::Population(const Topology& topo, std::size_t bots, std::size_t benign, std::size_t max_conns, Rng& rng)
    : max_conns_(max_conns), bots_(bots) {
  if (topo.node_count() < 2) throw Error(ErrorCode::Argument, "population needs at least 2 nodes");
  if (max_conns == 0) throw Error(ErrorCode::Argument, "max_conns must be positive");
  // Kinds are shuffled so entity ids carry no hint of ground truth. Each
  // kind is spread evenly over the nodes (counts differ by at most one).
  const std::size_t n = topo.node_count();
  std::vector<EntityKind> kinds(bots, EntityKind::Bot);
  kinds.resize(bots + benign, EntityKind::Benign);
  rng.shuffle(kinds);
  auto spread = [&](std::size_t count) {
    std::vector<NodeId> homes(count);
    for (std::size_t i = 0; i < count; ++i) homes[i] = NodeId{static_cast<std::uint32_t>(i % n)};
    rng.shuffle(homes);
    return homes;
  };
  std::vector<NodeId> bot_homes = spread(bots), benign_homes = spread(benign);
  std::size_t next_bot = 0, next_benign = 0;
  entities_.reserve(kinds.size());
  flows_.reserve(kinds.size() * max_conns);
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    NodeId home = kinds[i] == EntityKind::Bot ? bot_homes[next_bot++] : benign_homes[next_benign++];
    Entity e{EntityId{static_cast<std::uint32_t>(i)}, home, kinds[i]};
    entities_.push_back(e);
    for (std::size_t s = 0; s < max_conns; ++s) {
      Flow f;
      f.id = FlowId{static_cast<std::uint32_t>(i * max_conns + s)};
      f.origin = e.id;
      f.src = e.home;
      f.dst = e.home;
      flows_.push_back(f);
    }
  }
}

std::span<const Flow> Population::flows_of(EntityId e) const {
  return std::span<const Flow>(flows_).subspan(e.value * max_conns_, max_conns_);
}

std::size_t Population::active_flows(EntityId e) const {
  std::size_t n = 0;
  for (const Flow& f : flows_of(e)) n += f.active;
  return n;
}

Flow* Population::open_flow(EntityId e, NodeId dst, Bandwidth bw, Step now) {
  if (dst == entities_.at(e.value).home) throw Error(ErrorCode::Argument, "flow destination equals its home");
  if (!(bw > 0.0)) throw Error(ErrorCode::Argument, "flow bandwidth must be positive");
  for (std::size_t s = 0; s < max_conns_; ++s) {
    Flow& f = flows_[e.value * max_conns_ + s];
    if (f.active) continue;
    f.dst = dst;
    f.bandwidth = bw;
    f.birth = now;
    f.active = true;
    return &f;
  }
  return nullptr;
}

LinkMap attacker_observe(const RouteTable& routes, const RoutingConfig& routing, const std::vector<Bandwidth>& loads) {
  return LinkMap{routes, routing, loads};
}

std::vector<LinkId> select_target_links(const Topology& topo, const LinkMap& view, NodeId origin, NodeId target,
                                        AttackMode mode, std::size_t budget,
                                        const std::vector<Bandwidth>* attack_power, double threshold) {
  auto it = view.routes.find({origin, target});
  if (it == view.routes.end()) return {};
  auto util = [&](LinkId l) {
    Bandwidth load = l.value < view.loads.size() ? view.loads[l.value] : 0.0;
    return load / topo.link(l).capacity;
  };
  // Lower is weaker. Headroom per unit of reachable attack bandwidth, or
  // minus the utilization when no estimate is given.
  auto weakness = [&](LinkId l) {
    if (!attack_power) return -util(l);
    Bandwidth room = std::max(0.0, threshold * topo.link(l).capacity - view.loads[l.value]);
    Bandwidth power = (*attack_power)[l.value];
    return power > 0 ? room / power : std::numeric_limits<double>::infinity();
  };
  auto weaker = [&](LinkId a, LinkId b) {
    double wa = weakness(a), wb = weakness(b);
    if (wa != wb) return wa < wb;
    if (util(a) != util(b)) return util(a) > util(b);
    return a < b;
  };
  std::vector<LinkId> picked;
  for (const Path& p : it->second) {
    if (p.empty()) continue;
    std::size_t b = 0;
    for (std::size_t i = 1; i < p.links.size(); ++i)
      if (weaker(p.links[i], p.links[b])) b = i;
    std::size_t at = b;
    if (mode == AttackMode::HorizontalEfferent) {
      if (b == 0) continue;
      at = b - 1;
    } else if (mode == AttackMode::HorizontalAfferent) {
      if (b + 1 >= p.links.size()) continue;
      at = b + 1;
    }
    if (std::find(picked.begin(), picked.end(), p.links[at]) == picked.end()) picked.push_back(p.links[at]);
  }
  if (budget > 0 && picked.size() > budget) {
    std::stable_sort(picked.begin(), picked.end(), weaker);
    picked.resize(budget);
  }
  return picked;
}

std::vector<Bandwidth> attack_power(const Population& pop, const Topology& topo, const LinkMap& view, NodeId origin,
                                    NodeId target, double reuse_ratio, Bandwidth flow_bw, bool any_path) {
  std::vector<Bandwidth> power(topo.link_count(), 0.0);
  auto it = view.routes.find({origin, target});
  if (it == view.routes.end()) return power;
  std::vector<LinkId> links;
  for (const Path& p : it->second)
    for (LinkId l : p.links)
      if (std::find(links.begin(), links.end(), l) == links.end()) links.push_back(l);
  DecoyIndex index(topo, view.routes, view.routing, target, links, any_path);
  // Slots per home node: idle ones plus the reusable share of busy ones.
  std::vector<double> slots(topo.node_count(), 0.0);
  for (const Entity& e : pop.entities()) {
    if (e.kind != EntityKind::Bot) continue;
    double busy = static_cast<double>(pop.active_flows(e.id));
    slots[e.home.value] += static_cast<double>(pop.max_conns()) - busy + busy * reuse_ratio / 100.0;
  }
  for (LinkId l : links)
    for (std::uint32_t h = 0; h < topo.node_count(); ++h)
      if (index.reachable(NodeId{h}, l)) power[l.value] += slots[h] * flow_bw;
  return power;
}

void route_new_flow(NetworkView& net, const Flow& f, std::optional<std::size_t> path) {
  auto it = net.routes.find(f.pair());
  if (it == net.routes.end() || it->second.empty())
    throw Error(ErrorCode::Consistency, "no route for new flow " + std::to_string(f.id.value));
  std::size_t k = path && *path < it->second.size() ? *path : primary_index(net.routing, f.pair(), it->second.size());
  if (net.routing.path_index.size() <= f.id.value) net.routing.path_index.resize(f.id.value + 1, -1);
  net.routing.path_index[f.id.value] = static_cast<std::int32_t>(k);
  for (LinkId l : it->second[k].links) net.loads[l.value] += f.bandwidth;
}

void unroute_flow(NetworkView& net, const Flow& f) {
  for (LinkId l : flow_path(net.routes, net.routing, f).links) net.loads[l.value] -= f.bandwidth;
  net.routing.path_index[f.id.value] = -1;
}

DecoyIndex::DecoyIndex(const Topology& topo, const RouteTable& routes, const RoutingConfig& routing, NodeId target,
                       std::span<const LinkId> links, bool any_path)
    : nodes_(topo.node_count()), links_(links.begin(), links.end()), table_(nodes_ * links_.size()) {
  if (links_.empty()) return;
  for (std::uint32_t h = 0; h < nodes_; ++h) {
    for (std::uint32_t m = 0; m < nodes_; ++m) {
      if (m == h || NodeId{m} == target) continue;
      auto it = routes.find({NodeId{h}, NodeId{m}});
      if (it == routes.end() || it->second.empty()) continue;
      const std::size_t primary = primary_index(routing, it->first, it->second.size());
      for (std::size_t i = 0; i < links_.size(); ++i) {
        auto& cell = table_[h * links_.size() + i];
        if (it->second[primary].contains(links_[i])) {
          cell.push_back({NodeId{m}, primary});
          continue;
        }
        if (!any_path) continue;
        for (std::size_t k = 0; k < it->second.size(); ++k)
          if (it->second[k].contains(links_[i])) {
            cell.push_back({NodeId{m}, k});
            break;
          }
      }
    }
  }
}

const std::vector<Decoy>& DecoyIndex::decoys(NodeId home, LinkId link) const {
  static const std::vector<Decoy> none;
  auto it = std::find(links_.begin(), links_.end(), link);
  if (it == links_.end() || home.value >= nodes_) return none;
  return table_[home.value * links_.size() + static_cast<std::size_t>(it - links_.begin())];
}

std::size_t usable_spare_slots(const Population& pop, const DecoyIndex& index, std::span<const LinkId> links) {
  std::size_t spare = 0;
  for (const Entity& e : pop.entities()) {
    if (e.kind != EntityKind::Bot) continue;
    bool reach = std::any_of(links.begin(), links.end(), [&](LinkId l) { return index.reachable(e.home, l); });
    if (reach) spare += pop.max_conns() - pop.active_flows(e.id);
  }
  return spare;
}

WaveResult launch_wave(Population& pop, NetworkView& net, AttackPlan& plan, double reuse_ratio, Bandwidth flow_bw,
                       double threshold, Step now, Rng& rng) {
  WaveResult out;
  plan.decoys.clear();
  const auto& links = plan.target_links;
  if (links.empty()) return out;
  DecoyIndex index(net.topo, net.routes, net.routing, plan.target, links, plan.any_path);

  auto gap = [&](LinkId l) { return threshold * net.topo.link(l).capacity - net.loads[l.value]; };
  // Reachable target link with the largest remaining gap (ties: first in plan order).
  auto best_link = [&](NodeId home, bool need_gap) -> std::optional<LinkId> {
    std::optional<LinkId> best;
    for (LinkId l : links) {
      if (!index.reachable(home, l)) continue;
      if (need_gap && !below_flood(net.loads[l.value], net.topo.link(l).capacity, threshold)) continue;
      if (!best || gap(l) > gap(*best)) best = l;
    }
    return best;
  };
  auto pick_decoy = [&](NodeId home, LinkId l) {
    const auto& d = index.decoys(home, l);
    Decoy m = d[rng.below(d.size())];
    plan.decoys.insert(m.node);
    return m;
  };

  // Retarget a share of the active bot flows.
  std::vector<FlowId> active;
  for (const Flow& f : pop.flows())
    if (f.active && pop.entity(f.origin).kind == EntityKind::Bot) active.push_back(f.id);
  auto chosen = rng.sample(active.size(), percent_of(reuse_ratio, active.size()));
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t c : chosen) {
    Flow& f = pop.flows()[active[c].value];
    if (!best_link(f.src, false)) continue;
    unroute_flow(net, f);
    LinkId l = *best_link(f.src, false);
    Decoy d = pick_decoy(f.src, l);
    f.dst = d.node;
    f.birth = now;
    route_new_flow(net, f, d.path);
    out.changed.push_back(f.id);
    ++out.retargeted;
  }

  // Idle slots join until every target link is flooded.
  std::vector<EntityId> bots;
  for (const Entity& e : pop.entities())
    if (e.kind == EntityKind::Bot) bots.push_back(e.id);
  rng.shuffle(bots);
  std::vector<std::vector<EntityId>> cand(links.size());
  std::vector<std::size_t> ptr(links.size(), 0);
  for (EntityId b : bots)
    for (std::size_t i = 0; i < links.size(); ++i)
      if (index.reachable(pop.entity(b).home, links[i])) cand[i].push_back(b);

  for (;;) {
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (!below_flood(net.loads[links[i].value], net.topo.link(links[i]).capacity, threshold)) continue;
      while (ptr[i] < cand[i].size() && pop.active_flows(cand[i][ptr[i]]) >= pop.max_conns()) ++ptr[i];
      if (ptr[i] >= cand[i].size()) continue;
      if (!pick || gap(links[i]) > gap(links[*pick])) pick = i;
    }
    if (!pick) break;
    EntityId b = cand[*pick][ptr[*pick]];
    NodeId home = pop.entity(b).home;
    Decoy d = pick_decoy(home, links[*pick]);
    Flow* f = pop.open_flow(b, d.node, flow_bw, now);
    route_new_flow(net, *f, d.path);
    out.changed.push_back(f->id);
    ++out.opened;
  }
  return out;
}

void init_benign(Population& pop, NetworkView& net, Popularity popularity, double zipf_s, Bandwidth flow_bw,
                 Step now, Rng& rng) {
  const std::size_t n = net.topo.node_count();
  std::vector<NodeId> rank(n);
  for (std::uint32_t i = 0; i < n; ++i) rank[i] = NodeId{i};
  rng.shuffle(rank);
  std::vector<double> cum(n);
  double acc = 0.0;
  for (std::size_t r = 0; r < n; ++r) cum[r] = acc += 1.0 / std::pow(static_cast<double>(r + 1), zipf_s);

  for (const Entity& e : pop.entities()) {
    if (e.kind != EntityKind::Benign) continue;
    for (std::size_t s = 0; s < pop.max_conns(); ++s) {
      NodeId dst;
      if (popularity == Popularity::Zipf) {
        do {
          auto r = std::upper_bound(cum.begin(), cum.end(), rng.unit() * acc) - cum.begin();
          dst = rank[std::min<std::size_t>(static_cast<std::size_t>(r), n - 1)];
        } while (dst == e.home);
      } else {
        dst = uniform_other_node(n, e.home, rng);
      }
      Flow* f = pop.open_flow(e.id, dst, flow_bw, now);
      route_new_flow(net, *f);
    }
  }
}

std::vector<FlowId> benign_step(Population& pop, NetworkView& net, double rehome_ratio, Step now, Rng& rng) {
  std::vector<FlowId> active;
  for (const Flow& f : pop.flows())
    if (f.active && pop.entity(f.origin).kind == EntityKind::Benign) active.push_back(f.id);
  auto chosen = rng.sample(active.size(), percent_of(rehome_ratio, active.size()));
  std::sort(chosen.begin(), chosen.end());
  std::vector<FlowId> changed;
  for (std::size_t c : chosen) {
    Flow& f = pop.flows()[active[c].value];
    unroute_flow(net, f);
    f.dst = uniform_other_node(net.topo.node_count(), f.src, rng);
    f.birth = now;
    route_new_flow(net, f);
    changed.push_back(f.id);
  }
  return changed;
}

}  // namespace ariel
