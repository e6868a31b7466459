#include "ariel/te_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ariel/lp.hpp"
#include "ariel/random.hpp"

namespace ariel {

TrafficMatrix aggregate_demand(std::span<const Flow> flows) {
  TrafficMatrix m;
  for (const Flow& f : flows)
    if (f.active && f.src != f.dst && f.bandwidth > 0) m.demand[f.pair()] += f.bandwidth;
  return m;
}

namespace {

std::string pair_name(NodePair p) {
  return "(" + std::to_string(p.from.value) + "," + std::to_string(p.to.value) + ")";
}

double max_utilization(const Topology& topo, const std::vector<Bandwidth>& load) {
  double u = 0.0;
  for (const Link& l : topo.links()) u = std::max(u, load[l.id.value] / l.capacity);
  return u;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stage 1

LoadFractions solve_load_fractions(const Topology& topo, const RouteTable& routes, const TrafficMatrix& demand,
                                   const LpOptions& opts) {
  struct Entry {
    NodePair pair;
    Bandwidth demand;
    const std::vector<Path>* paths;
    std::size_t first_var;  // index of x_{p,1}
  };
  std::vector<Entry> entries;
  std::size_t nvars = 0;
  double max_demand = 0.0;
  for (const auto& [pair, d] : demand.demand) {
    if (d <= 0) continue;
    auto it = routes.find(pair);
    if (it == routes.end() || it->second.empty())
      throw Error(ErrorCode::Infeasible, "demand pair " + pair_name(pair) + " has no path");
    entries.push_back({pair, d, &it->second, nvars});
    nvars += it->second.size() - 1;
    max_demand = std::max(max_demand, d);
  }

  LoadFractions out;
  const std::size_t L = topo.link_count();
  std::vector<double> base(L, 0.0);  // utilization with everything on path 0
  for (const Entry& e : entries)
    for (LinkId l : (*e.paths)[0].links) base[l.value] += e.demand / topo.link(l).capacity;
  const double u0 = base.empty() ? 0.0 : *std::max_element(base.begin(), base.end());

  if (nvars > 0) {
    const std::size_t w = nvars;  // last column
    BoundedLp lp;
    lp.c.assign(nvars + 1, 0.0);
    lp.c[w] = 1.0;
    lp.c2.assign(nvars + 1, 0.0);
    lp.upper.assign(nvars + 1, 1.0);
    lp.upper[w] = u0;

    // Link rows: sum_k (D/C)(a_k - a_0) x_k + w <= u0 - base_l.
    std::vector<std::map<std::size_t, double>> rows(L);
    std::vector<char> used(L, 0);
    for (std::size_t l = 0; l < L; ++l) used[l] = base[l] > 0;
    std::size_t max_hops = 1;
    for (const Entry& e : entries) {
      const auto& ps = *e.paths;
      for (const Path& p : ps) max_hops = std::max(max_hops, p.hops());
      for (std::size_t k = 1; k < ps.size(); ++k) {
        std::size_t var = e.first_var + k - 1;
        for (LinkId l : ps[k].links) rows[l.value][var] += e.demand / topo.link(l).capacity;
        for (LinkId l : ps[0].links) rows[l.value][var] -= e.demand / topo.link(l).capacity;
      }
    }
    std::vector<std::size_t> row_link;
    for (std::size_t l = 0; l < L; ++l) {
      bool nonzero = false;
      for (const auto& [var, a] : rows[l]) nonzero |= std::fabs(a) > 1e-15;
      if (!nonzero && !used[l]) continue;
      std::vector<double> r(nvars + 1, 0.0);
      for (const auto& [var, a] : rows[l]) r[var] = a;
      r[w] = 1.0;
      lp.A.push_back(std::move(r));
      lp.b.push_back(std::max(0.0, u0 - base[l]));
      row_link.push_back(l);
    }
    for (const Entry& e : entries) {
      const auto& ps = *e.paths;
      if (ps.size() >= 3) {
        std::vector<double> r(nvars + 1, 0.0);
        for (std::size_t k = 1; k < ps.size(); ++k) r[e.first_var + k - 1] = 1.0;
        lp.A.push_back(std::move(r));
        lp.b.push_back(1.0);
      }
      // Tie-break: prefer short paths, weighted by the pair's demand share.
      const std::vector<double>* pen = nullptr;
      if (auto it = opts.path_penalty.find(e.pair); it != opts.path_penalty.end() && it->second.size() == ps.size())
        pen = &it->second;
      for (std::size_t k = 1; k < ps.size(); ++k) {
        double cost = (static_cast<double>(ps[k].hops()) - static_cast<double>(ps[0].hops())) /
                      static_cast<double>(max_hops);
        if (pen) cost += (*pen)[k] - (*pen)[0];
        lp.c2[e.first_var + k - 1] = -cost * e.demand / max_demand;
      }
    }

    LpSolution sol = solve_bounded_lp(lp);
    for (const Entry& e : entries) {
      std::vector<double> f(e.paths->size(), 0.0);
      double rest = 1.0;
      for (std::size_t k = 1; k < f.size(); ++k) {
        f[k] = std::clamp(sol.x[e.first_var + k - 1], 0.0, 1.0);
        rest -= f[k];
      }
      f[0] = std::max(0.0, rest);
      double sum = std::accumulate(f.begin(), f.end(), 0.0);
      for (double& v : f) v /= sum;
      out.fractions[e.pair] = std::move(f);
    }
  } else {
    for (const Entry& e : entries) out.fractions[e.pair] = {1.0};
  }

  TrafficMatrix dm = demand;
  out.utilization = max_utilization(topo, fractional_link_loads(topo, routes, dm, out));
  out.saturated = out.utilization > 1.0 + 1e-12;
  return out;
}

LoadFractions solve_load_fractions(const Topology& topo, const PathSet& paths, const TrafficMatrix& demand) {
  RouteTable routes;
  for (const auto& [pair, d] : demand.demand) {
    auto ps = paths.paths(pair);
    routes[pair] = std::vector<Path>(ps.begin(), ps.end());
  }
  return solve_load_fractions(topo, routes, demand);
}

std::vector<Bandwidth> fractional_link_loads(const Topology& topo, const RouteTable& routes,
                                             const TrafficMatrix& demand, const LoadFractions& f) {
  std::vector<Bandwidth> load(topo.link_count(), 0.0);
  for (const auto& [pair, d] : demand.demand) {
    auto fit = f.fractions.find(pair);
    auto rit = routes.find(pair);
    if (fit == f.fractions.end() || rit == routes.end()) continue;
    for (std::size_t k = 0; k < fit->second.size() && k < rit->second.size(); ++k)
      for (LinkId l : rit->second[k].links) load[l.value] += fit->second[k] * d;
  }
  return load;
}

// ---------------------------------------------------------------------------
// Routes

Path apply_pins(const Topology& topo, const Path& base, const std::map<NodePair, Path>& pins,
                const PinTriggers* triggers) {
  if (base.empty() || pins.empty()) return base;
  const NodeId dest = topo.link(base.links.back()).dst;
  NodeId u = topo.link(base.links.front()).src;
  const Path* cur = &base;
  std::size_t pos = 0;
  std::set<NodeId> switched;
  std::vector<LinkId> walk;
  while (u != dest) {
    auto it = pins.find({u, dest});
    bool take = it != pins.end() && !it->second.empty() && !switched.count(u);
    if (take && triggers) {
      auto tr = triggers->find({u, dest});
      if (tr != triggers->end() && !tr->second.empty())
        take = pos < cur->links.size() && tr->second.count(cur->links[pos]);
    }
    if (take) {
      switched.insert(u);
      cur = &it->second;
      pos = 0;
    }
    if (pos >= cur->links.size()) break;
    LinkId l = cur->links[pos++];
    walk.push_back(l);
    u = topo.link(l).dst;
  }

  // Cut out any cycle the switch created.
  Path out;
  std::vector<NodeId> nodes{topo.link(base.links.front()).src};
  for (LinkId l : walk) {
    NodeId v = topo.link(l).dst;
    auto seen = std::find(nodes.begin(), nodes.end(), v);
    if (seen != nodes.end()) {
      std::size_t j = static_cast<std::size_t>(seen - nodes.begin());
      nodes.resize(j + 1);
      out.links.resize(j);
      continue;
    }
    out.links.push_back(l);
    nodes.push_back(v);
  }
  return out;
}

namespace {

// Links of pins whose path does not visit `dest`: traffic toward `dest` has no
// business on them.
std::set<LinkId> foreign_pin_links(const Topology& topo, const std::map<NodePair, Path>& pins, NodeId dest) {
  std::set<LinkId> out;
  for (const auto& [pair, p] : pins) {
    if (p.empty() || pair.to == dest) continue;
    bool visits = false;
    for (LinkId l : p.links) visits = visits || topo.link(l).dst == dest;
    if (!visits) out.insert(p.links.begin(), p.links.end());
  }
  return out;
}

std::vector<Path> keep_off(std::vector<Path> cands, const std::set<LinkId>& avoid) {
  if (avoid.empty() || cands.size() < 2) return cands;
  auto shared = [&](const Path& p) {
    std::size_t c = 0;
    for (LinkId l : p.links) c += avoid.count(l);
    return c;
  };
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (const Path& p : cands) best = std::min(best, shared(p));
  std::vector<Path> out;
  for (Path& p : cands)
    if (shared(p) == best) out.push_back(std::move(p));
  return out;
}

}  // namespace

std::vector<Path> effective_paths(const Topology& topo, const PathSet& paths, const std::map<NodePair, Path>& pins,
                                  NodePair pair, const PinTriggers* triggers, bool reserve) {
  if (pair.from == pair.to) return {};
  if (auto it = pins.find(pair); it != pins.end()) {
    bool conditional = false;
    if (triggers)
      if (auto tr = triggers->find(pair); tr != triggers->end()) conditional = !tr->second.empty();
    if (!conditional) return {apply_pins(topo, it->second, pins, triggers)};
  }
  std::vector<Path> out;
  for (const Path& p : paths.paths(pair)) {
    Path q = apply_pins(topo, p, pins, triggers);
    if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(std::move(q));
  }
  if (reserve) return keep_off(std::move(out), foreign_pin_links(topo, pins, pair.to));
  return out;
}

RouteTable effective_routes(const Topology& topo, const PathSet& paths, const std::map<NodePair, Path>& pins,
                            const PinTriggers* triggers, bool reserve) {
  RouteTable t;
  const auto n = static_cast<std::uint32_t>(topo.node_count());
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = 0; b < n; ++b)
      if (a != b) t[{NodeId{a}, NodeId{b}}] = effective_paths(topo, paths, pins, {NodeId{a}, NodeId{b}}, triggers, reserve);
  return t;
}

const Path& flow_path(const RouteTable& routes, const RoutingConfig& routing, const Flow& flow) {
  auto it = routes.find(flow.pair());
  std::int32_t k = flow.id.value < routing.path_index.size() ? routing.path_index[flow.id.value] : -1;
  if (it == routes.end() || k < 0 || static_cast<std::size_t>(k) >= it->second.size()) {
    throw Error(ErrorCode::Consistency, "flow " + std::to_string(flow.id.value) + " on pair " +
                                            pair_name(flow.pair()) + " has no assigned path");
  }
  return it->second[static_cast<std::size_t>(k)];
}

std::vector<Bandwidth> link_loads(const Topology& topo, std::span<const Flow> flows, const RouteTable& routes,
                                  const RoutingConfig& routing) {
  std::vector<Bandwidth> load(topo.link_count(), 0.0);
  for (const Flow& f : flows) {
    if (!f.active) continue;
    for (LinkId l : flow_path(routes, routing, f).links) load[l.value] += f.bandwidth;
  }
  return load;
}

// ---------------------------------------------------------------------------
// Stage 2

namespace {

std::map<NodePair, std::vector<std::size_t>> flows_by_pair(std::span<const Flow> flows) {
  std::map<NodePair, std::vector<std::size_t>> by;
  for (std::size_t i = 0; i < flows.size(); ++i)
    if (flows[i].active) by[flows[i].pair()].push_back(i);
  return by;
}

std::vector<double> pair_fractions(const LoadFractions& f, NodePair pair, std::size_t k) {
  std::vector<double> out(k, 0.0);
  if (auto it = f.fractions.find(pair); it != f.fractions.end() && it->second.size() == k) return it->second;
  if (k > 0) out[0] = 1.0;
  return out;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Tracks the realized share of one pair while flows are placed.
struct Quota {
  std::vector<double> target;
  std::vector<double> load;

  double deficit(std::size_t k) const { return target[k] - load[k]; }
  bool fits(std::size_t k, double bw) const { return load[k] + bw <= target[k] + 1e-9 * (bw + target[k]); }
  std::size_t most_behind() const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < target.size(); ++k)
      if (deficit(k) > deficit(best)) best = k;
    return best;
  }
};

Quota make_quota(const std::vector<double>& f, std::span<const Flow> flows, const std::vector<std::size_t>& idx) {
  double total = 0;
  for (std::size_t i : idx) total += flows[i].bandwidth;
  Quota q;
  for (double v : f) q.target.push_back(v * total);
  q.load.assign(f.size(), 0.0);
  return q;
}

std::size_t sample_index(Rng& rng, const std::vector<double>& f) {
  double u = rng.unit();
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    acc += f[k];
    if (u < acc) return k;
  }
  for (std::size_t k = f.size(); k-- > 0;)
    if (f[k] > 0) return k;
  return 0;
}

void place_sampled(Rng& rng, std::span<const Flow> flows, const std::vector<std::size_t>& order,
                   const std::vector<double>& f, Quota& q, RoutingConfig& cfg) {
  for (std::size_t i : order) {
    const double bw = flows[i].bandwidth;
    std::size_t k = sample_index(rng, f);
    if (!q.fits(k, bw)) k = q.most_behind();
    q.load[k] += bw;
    cfg.path_index[flows[i].id.value] = static_cast<std::int32_t>(k);
  }
}

RoutingConfig empty_config(std::span<const Flow> flows, const RouteTable& routes, const LoadFractions& fractions,
                           const std::map<NodePair, Path>& pins) {
  RoutingConfig cfg;
  cfg.pins = pins;
  std::size_t max_id = 0;
  for (const Flow& f : flows) max_id = std::max<std::size_t>(max_id, f.id.value + 1);
  cfg.path_index.assign(max_id, -1);
  for (const auto& [pair, f] : fractions.fractions) {
    auto it = routes.find(pair);
    if (it != routes.end() && f.size() == it->second.size()) {
      std::size_t k = argmax(f);
      if (k != 0) cfg.primary[pair] = k;
    }
  }
  return cfg;
}

}  // namespace

RoutingConfig map_flows_random(std::span<const Flow> flows, const RouteTable& routes, const LoadFractions& fractions,
                               std::uint64_t seed, const std::map<NodePair, Path>& pins) {
  RoutingConfig cfg = empty_config(flows, routes, fractions, pins);
  Rng rng(seed);
  for (auto& [pair, idx] : flows_by_pair(flows)) {
    auto it = routes.find(pair);
    if (it == routes.end() || it->second.empty())
      throw Error(ErrorCode::Infeasible, "flow pair " + pair_name(pair) + " has no path");
    auto f = pair_fractions(fractions, pair, it->second.size());
    Quota q = make_quota(f, flows, idx);
    rng.shuffle(idx);
    place_sampled(rng, flows, idx, f, q, cfg);
  }
  return cfg;
}

RoutingConfig map_flows_optimal(std::span<const Flow> flows, const Topology& topo, const RouteTable& routes,
                                const LoadFractions& fractions, const std::map<NodePair, Path>& pins,
                                const std::set<EntityId>& suspects, std::uint64_t seed) {
  RoutingConfig cfg = empty_config(flows, routes, fractions, pins);
  std::vector<char> pinned(topo.link_count(), 0);
  for (const auto& [pair, p] : pins)
    for (LinkId l : p.links) pinned[l.value] = 1;

  Rng rng(seed);
  for (auto& [pair, idx] : flows_by_pair(flows)) {
    auto it = routes.find(pair);
    if (it == routes.end() || it->second.empty())
      throw Error(ErrorCode::Infeasible, "flow pair " + pair_name(pair) + " has no path");
    const auto& ps = it->second;
    auto f = pair_fractions(fractions, pair, ps.size());
    Quota q = make_quota(f, flows, idx);
    rng.shuffle(idx);

    std::vector<std::size_t> overlap(ps.size(), 0);
    for (std::size_t k = 0; k < ps.size(); ++k)
      for (LinkId l : ps[k].links) overlap[k] += pinned[l.value];

    std::vector<std::size_t> normal;
    for (std::size_t i : idx) {
      if (!suspects.count(flows[i].origin)) {
        normal.push_back(i);
        continue;
      }
      const double bw = flows[i].bandwidth;
      // Least pin overlap among paths with room left; seeded pick among equals.
      std::vector<std::size_t> best;
      for (std::size_t k = 0; k < ps.size(); ++k) {
        if (!q.fits(k, bw)) continue;
        if (!best.empty() && overlap[k] > overlap[best.front()]) continue;
        if (!best.empty() && overlap[k] < overlap[best.front()]) best.clear();
        best.push_back(k);
      }
      std::size_t k = best.empty() ? q.most_behind() : best[best.size() == 1 ? 0 : rng.below(best.size())];
      q.load[k] += bw;
      cfg.path_index[flows[i].id.value] = static_cast<std::int32_t>(k);
    }
    place_sampled(rng, flows, normal, f, q, cfg);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Destination model

void DestinationModel::observe(EntityId e, NodeId destination) {
  History& h = hist_[e];
  ++h.counts[destination];
  ++h.total;
}

double DestinationModel::unseen_mass(EntityId e) const {
  auto it = hist_.find(e);
  if (it == hist_.end()) return 1.0;
  return 1.0 / static_cast<double>(it->second.total + it->second.counts.size() + 1);
}

double DestinationModel::probability(EntityId e, NodeId destination) const {
  auto it = hist_.find(e);
  if (it == hist_.end()) return node_count_ ? 1.0 / static_cast<double>(node_count_) : 0.0;
  const History& h = it->second;
  const double denom = static_cast<double>(h.total + h.counts.size() + 1);
  if (auto c = h.counts.find(destination); c != h.counts.end()) return static_cast<double>(c->second + 1) / denom;
  if (node_count_ <= h.counts.size()) return 0.0;
  return (1.0 / denom) / static_cast<double>(node_count_ - h.counts.size());
}

std::size_t DestinationModel::history_length(EntityId e) const {
  auto it = hist_.find(e);
  return it == hist_.end() ? 0 : it->second.total;
}

void update_destination_model(DestinationModel& model, std::span<const Flow> flows) {
  for (const Flow& f : flows)
    if (f.active) model.observe(f.origin, f.dst);
}

// ---------------------------------------------------------------------------
// Pins

std::vector<PinCandidate> rank_pin_candidates(const Topology& topo, const PathSet& paths, NodePair pair,
                                              const std::vector<std::uint32_t>& suspicious_flows_per_link,
                                              const std::set<EntityId>& implicated, const DestinationModel& model) {
  std::vector<Path> cands = k_shortest_paths(topo, pair.from, pair.to, 8);
  {
    std::vector<bool> banned(topo.link_count(), false);
    for (std::size_t l = 0; l < banned.size(); ++l) banned[l] = suspicious_flows_per_link[l] > 0;
    if (auto p = shortest_path(topo, pair.from, pair.to, &banned)) cands.push_back(*p);
  }
  for (const Path& p : paths.paths(pair)) cands.push_back(p);
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  auto mass_of = [&](NodeId m) {
    if (implicated.empty()) return model.node_count() ? 1.0 / static_cast<double>(model.node_count()) : 0.0;
    double s = 0.0;
    for (EntityId e : implicated) s += model.probability(e, m);
    return s / static_cast<double>(implicated.size());
  };

  std::vector<PinCandidate> out;
  for (Path& p : cands) {
    PinCandidate c;
    const std::size_t h = p.hops();
    for (std::size_t i = 0; i < h; ++i) {
      std::uint32_t cnt = suspicious_flows_per_link[p.links[i].value];
      if (cnt == 0) continue;
      c.overlap += cnt;
      c.closeness += std::min(i, h - 1 - i);
    }
    auto nodes = path_nodes(topo, p);
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i) c.destination_mass += mass_of(nodes[i]);
    c.path = std::move(p);
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const PinCandidate& a, const PinCandidate& b) {
    if (a.overlap != b.overlap) return a.overlap < b.overlap;
    if (a.closeness != b.closeness) return a.closeness < b.closeness;
    if (std::fabs(a.destination_mass - b.destination_mass) > 1e-12) return a.destination_mass < b.destination_mass;
    if (a.path.hops() != b.path.hops()) return a.path.hops() < b.path.hops();
    return a.path.links < b.path.links;
  });
  return out;
}

std::map<NodePair, Path> plan_pins(const Topology& topo, const PathSet& paths, std::span<const Flow> flows,
                                   const RouteTable& current_routes, const RoutingConfig& current,
                                   const PinRequest& request, const DestinationModel& model,
                                   std::vector<std::string>* diagnostics, PinTriggers* triggers) {
  std::vector<std::uint32_t> suspicious(topo.link_count(), 0);
  for (const Flow& f : flows) {
    if (!f.active || !request.suspects.count(f.origin)) continue;
    for (LinkId l : flow_path(current_routes, current, f).links) ++suspicious[l.value];
  }

  std::map<NodePair, Path> pins;
  for (LinkId l : request.observation.flooded_links) {
    const NodeId x = topo.link(l).src;
    const auto& served = request.observation.nodes_of(l);
    for (NodeId n : request.implicated_nodes) {
      if (n == x || !served.count(n)) continue;
      NodePair pair{x, n};
      if (triggers) (*triggers)[pair].insert(l);
      if (pins.count(pair)) continue;
      auto ranked = rank_pin_candidates(topo, paths, pair, suspicious, request.observation.suspects_of(l), model);
      if (ranked.empty()) {
        if (diagnostics) diagnostics->push_back("no pin candidate for pair " + pair_name(pair) + "; mapped randomly");
        continue;
      }
      pins[pair] = ranked.front().path;
    }
  }
  return pins;
}

std::map<NodePair, std::vector<double>> pin_overlap_penalty(const Topology& topo, const RouteTable& routes,
                                                            const std::map<NodePair, Path>& pins,
                                                            std::span<const Flow> flows,
                                                            const std::set<EntityId>& suspects) {
  std::map<NodePair, std::vector<double>> out;
  if (pins.empty() || suspects.empty()) return out;
  std::vector<char> pinned(topo.link_count(), 0);
  for (const auto& [pair, p] : pins)
    for (LinkId l : p.links) pinned[l.value] = 1;
  std::map<NodePair, std::pair<double, double>> share;  // suspicious, total
  for (const Flow& f : flows) {
    if (!f.active) continue;
    auto& s = share[f.pair()];
    s.second += f.bandwidth;
    if (suspects.count(f.origin)) s.first += f.bandwidth;
  }
  for (const auto& [pair, s] : share) {
    if (s.first <= 0 || pins.count(pair)) continue;
    auto it = routes.find(pair);
    if (it == routes.end() || it->second.size() < 2) continue;
    std::vector<double> pen;
    for (const Path& p : it->second) {
      std::size_t shared = 0;
      for (LinkId l : p.links) shared += pinned[l.value];
      pen.push_back(s.first / s.second * static_cast<double>(shared) / static_cast<double>(std::max<std::size_t>(1, p.hops())));
    }
    out[pair] = std::move(pen);
  }
  return out;
}

TeResult reroute_random(const Topology& topo, const PathSet& paths, std::span<const Flow> flows, std::uint64_t seed) {
  TeResult r;
  r.routes = effective_routes(topo, paths, {});
  r.fractions = solve_load_fractions(topo, r.routes, aggregate_demand(flows));
  r.routing = map_flows_random(flows, r.routes, r.fractions, seed);
  return r;
}

TeResult reroute_optimal(const Topology& topo, const PathSet& paths, std::span<const Flow> flows,
                         const RoutingConfig& current, const PinRequest& request, const DestinationModel& model,
                         std::uint64_t seed) {
  RouteTable current_routes = effective_routes(topo, paths, current.pins, &current.pin_triggers, true);
  std::vector<std::string> diag;
  std::map<NodePair, Path> pins = current.pins;
  PinTriggers triggers = current.pin_triggers;
  PinTriggers fresh;
  for (auto& [pair, p] : plan_pins(topo, paths, flows, current_routes, current, request, model, &diag, &fresh)) {
    pins[pair] = std::move(p);
    triggers[pair] = fresh[pair];  // a re-planned pin replaces the old one with its triggers
  }

  TeResult r;
  r.routes = effective_routes(topo, paths, pins, &triggers, true);
  LpOptions opts;
  opts.path_penalty = pin_overlap_penalty(topo, r.routes, pins, flows, request.suspects);
  r.fractions = solve_load_fractions(topo, r.routes, aggregate_demand(flows), opts);
  r.routing = map_flows_optimal(flows, topo, r.routes, r.fractions, pins, request.suspects, seed);
  r.routing.diagnostics = std::move(diag);
  r.routing.pin_triggers = std::move(triggers);
  return r;
}

RoutingConfig map_flows_optimal(const Topology& topo, const PathSet& paths, std::span<const Flow> flows,
                                const RoutingConfig& current, const PinRequest& request,
                                const DestinationModel& model, std::uint64_t seed) {
  return reroute_optimal(topo, paths, flows, current, request, model, seed).routing;
}

}  // namespace ariel
