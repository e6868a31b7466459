#include "ariel/simulator.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <functional>
#include <exception>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <thread>

namespace ariel {

namespace {

Error config_error(const std::string& field, const std::string& why) {
  return Error(ErrorCode::Config, "config field '" + field + "': " + why);
}

// Keeps the largest connected component, so every pair has a route.
Topology largest_component(const Topology& topo) {
  const std::size_t n = topo.node_count();
  std::vector<int> comp(n, -1);
  std::vector<std::size_t> sizes;
  std::vector<std::vector<NodeId>> adj(n);
  for (const Link& l : topo.links()) {
    adj[l.src.value].push_back(l.dst);
    adj[l.dst.value].push_back(l.src);
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    int c = static_cast<int>(sizes.size());
    sizes.push_back(0);
    std::vector<std::size_t> stack{s};
    comp[s] = c;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      ++sizes[c];
      for (NodeId v : adj[u])
        if (comp[v.value] < 0) comp[v.value] = c, stack.push_back(v.value);
    }
  }
  if (sizes.size() <= 1) return topo;
  int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  Topology out;
  out.name = topo.name;
  std::vector<NodeId> remap(n);
  for (std::uint32_t u = 0; u < n; ++u)
    if (comp[u] == keep) remap[u] = out.add_node(topo.node_name(NodeId{u}));
  for (const Link& l : topo.links())
    if (comp[l.src.value] == keep && comp[l.dst.value] == keep)
      out.add_link(remap[l.src.value], remap[l.dst.value], l.capacity);
  return out;
}

NodeId node_by_name(const Topology& topo, const std::string& name, const char* field) {
  auto n = topo.find_node(name);
  if (!n) throw config_error(field, "no node named '" + name + "'");
  return *n;
}

std::vector<std::uint64_t> supports_where(const std::vector<Relation>& rels, bool positive,
                                          const std::function<bool(const Relation&)>& label) {
  std::vector<std::uint64_t> out;
  for (const Relation& r : rels)
    if (label(r) == positive) out.push_back(r.support);
  return out;
}

}  // namespace

void validate(const ExperimentConfig& c) {
  if (c.topology.empty()) throw config_error("topology", "empty");
  if (!(c.capacity > 0)) throw config_error("capacity", "must be positive");
  if (c.bots + c.benign == 0) throw config_error("bots", "population is empty");
  if (c.max_conns == 0) throw config_error("max_conns", "must be at least 1");
  if (c.flow_bw && !(*c.flow_bw > 0)) throw config_error("flow_bw", "must be positive");
  if (!(c.flow_bw_scale > 0)) throw config_error("flow_bw_scale", "must be positive");
  if (!(c.calibrate_min > 0) || !(c.calibrate_max > c.calibrate_min))
    throw config_error("calibrate_min", "need 0 < calibrate_min < calibrate_max");
  if (!(c.reuse_ratio >= 0 && c.reuse_ratio <= 100)) throw config_error("reuse_ratio", "must be in [0,100]");
  if (!(c.rehome_ratio >= 0 && c.rehome_ratio <= 100)) throw config_error("rehome_ratio", "must be in [0,100]");
  if (c.horizon < 0) throw config_error("horizon", "must be nonnegative");
  if (c.timeout < 0) throw config_error("timeout", "must be nonnegative");
  if (!(c.strength_a > 0) || !(c.strength_b > 0)) throw config_error("strength_a", "a and b must be positive");
  if (!(c.threshold > 0 && c.threshold <= 1.5)) throw config_error("threshold", "must be in (0,1.5]");
  if (c.seeds.empty()) throw config_error("seeds", "no seeds");
  if (c.k_paths == 0) throw config_error("k_paths", "must be at least 1");
  if (!(c.zipf_s >= 0)) throw config_error("zipf_s", "must be nonnegative");
  if (c.max_failed_waves == 0) throw config_error("max_failed_waves", "must be at least 1");
}

Topology load_experiment_topology(const ExperimentConfig& cfg) {
  const std::string& t = cfg.topology;
  auto colon = t.find(':');
  if (colon != std::string::npos) {
    std::string kind = t.substr(0, colon);
    if (kind == "grid" || kind == "mesh" || kind == "ring" || kind == "line") {
      int n = 0;
      try {
        std::size_t used = 0;
        n = std::stoi(t.substr(colon + 1), &used);
        if (used != t.size() - colon - 1) throw std::invalid_argument(t);
      } catch (const std::exception&) {
        throw config_error("topology", "bad size in '" + t + "'");
      }
      if (n < 2) throw config_error("topology", "size must be at least 2");
      Topology topo = kind == "grid"   ? make_grid(n, cfg.capacity)
                      : kind == "mesh" ? make_full_mesh(n, cfg.capacity)
                      : kind == "ring" ? make_ring(n, cfg.capacity)
                                       : make_line(n, cfg.capacity);
      topo.name = t;
      return topo;
    }
  }
  std::filesystem::path p(t);
  if (p.is_relative() && !cfg.base_dir.empty()) p = std::filesystem::path(cfg.base_dir) / p;
  LoadOptions opts;
  opts.default_capacity = cfg.capacity;
  Topology topo = largest_component(load_topology(p, opts));
  if (topo.name.empty()) topo.name = p.stem().string();
  if (topo.node_count() < 2) throw Error(ErrorCode::Structure, p.string() + ": fewer than 2 connected nodes");
  return topo;
}

FloodObservation detect_floods(const Topology& topo, std::span<const Flow> flows, const RouteTable& routes,
                               const RoutingConfig& routing, const std::vector<Bandwidth>& loads, double threshold,
                               Step now) {
  FloodObservation obs;
  obs.time = now;
  std::vector<bool> flooded(topo.link_count(), false);
  for (const Link& l : topo.links()) {
    if (loads[l.id.value] >= threshold * l.capacity * (1.0 - 1e-12)) {
      flooded[l.id.value] = true;
      obs.flooded_links.insert(l.id);
    }
  }
  if (obs.flooded_links.empty()) return obs;
  for (const Flow& f : flows) {
    if (!f.active) continue;
    const Path& p = flow_path(routes, routing, f);
    for (std::size_t i = 0; i < p.links.size(); ++i) {
      LinkId l = p.links[i];
      if (!flooded[l.value]) continue;
      if (f.birth == now) obs.suspects[l].insert(f.origin);
      auto& nodes = obs.nodes[l];
      for (std::size_t j = i; j < p.links.size(); ++j) nodes.insert(topo.link(p.links[j]).dst);
    }
  }
  return obs;
}

double delta_s(const std::vector<std::uint64_t>& positive, const std::vector<std::uint64_t>& negative) {
  auto mean = [](const std::vector<std::uint64_t>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (auto x : v) s += static_cast<double>(x);
    return s / static_cast<double>(v.size());
  };
  return mean(positive) - mean(negative);
}

double attack_success(const AttackPlan& plan, const FloodObservation& obs) {
  if (plan.target_links.empty()) return 0.0;
  std::size_t hit = 0;
  for (LinkId l : plan.target_links) hit += obs.flooded_links.count(l);
  return static_cast<double>(hit) / static_cast<double>(plan.target_links.size());
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{
      "delta_s_entity", "delta_s_node", "delta_s_pair",  "success",   "participation",
      "availability",   "flooded_links", "utilization", "saturated", "terminated"};
  return names;
}

double metric_value(const StepMetrics& m, std::size_t index) {
  switch (index) {
    case 0: return m.delta_entity;
    case 1: return m.delta_node;
    case 2: return m.delta_pair;
    case 3: return m.success;
    case 4: return m.participation;
    case 5: return m.availability;
    case 6: return static_cast<double>(m.flooded_links);
    case 7: return m.utilization;
    case 8: return m.saturated ? 1.0 : 0.0;
    case 9: return m.terminated ? 1.0 : 0.0;
  }
  throw Error(ErrorCode::Argument, "metric index out of range");
}

Simulation::Simulation(std::shared_ptr<const Topology> topo, const ExperimentConfig& cfg, std::uint64_t seed,
                       Bandwidth flow_bw)
    : topo_(std::move(topo)),
      cfg_(cfg),
      seed_(seed),
      flow_bw_(flow_bw),
      benign_rng_(mix_seed(seed, 2)),
      attack_rng_(mix_seed(seed, 3)) {
  const Topology& t = *topo_;
  paths_ = std::make_shared<PathSet>(t, cfg_.k_paths);
  Rng pop_rng(mix_seed(seed, 1));
  pop_ = Population(t, cfg_.bots, cfg_.benign, cfg_.max_conns, pop_rng);
  dest_ = DestinationModel(t.node_count());

  auto [o, g] = most_distant_pair(t);
  plan_.origin = cfg_.origin.empty() ? o : node_by_name(t, cfg_.origin, "origin");
  plan_.target = cfg_.target.empty() ? g : node_by_name(t, cfg_.target, "target");
  if (plan_.origin == plan_.target) throw config_error("target", "origin and target coincide");
  plan_.mode = cfg_.attack_mode;
  plan_.budget = cfg_.attack_budget;
  plan_.any_path = cfg_.attacker_any_path;

  std::map<NodePair, Path> pins;
  if (cfg_.prepin_target) {
    for (std::uint32_t s = 0; s < t.node_count(); ++s) {
      if (NodeId{s} == plan_.target) continue;
      if (auto p = shortest_path(t, NodeId{s}, plan_.target)) pins[{NodeId{s}, plan_.target}] = *p;
    }
  }
  routes_ = effective_routes(t, *paths_, pins, nullptr, cfg_.mapping == Mapping::Optimal);
  routing_.pins = pins;
  routing_.path_index.assign(pop_.flows().size(), -1);
  loads_.assign(t.link_count(), 0.0);
  NetworkView net{t, routes_, routing_, loads_};
  init_benign(pop_, net, cfg_.popularity, cfg_.zipf_s, flow_bw_, 0, benign_rng_);

  // Initial TE on unit demand so the routing does not depend on flow_bw.
  std::vector<Flow> unit(pop_.flows().begin(), pop_.flows().end());
  for (Flow& f : unit) f.bandwidth = 1.0;
  fractions_ = solve_load_fractions(t, routes_, aggregate_demand(unit));
  routing_ = map_flows_random(unit, routes_, fractions_, mix_seed(seed, 4), pins);
  fractions_.utilization *= flow_bw_;
  fractions_.saturated = fractions_.utilization > 1.0 + 1e-12;
  loads_ = link_loads(t, pop_.flows(), routes_, routing_);
  update_destination_model(dest_, pop_.flows());
}

void Simulation::set_flow_bandwidth(Bandwidth bw) {
  if (!(bw > 0)) throw Error(ErrorCode::Argument, "flow bandwidth must be positive");
  for (Flow& f : pop_.flows())
    if (f.active) f.bandwidth = bw;
  fractions_.utilization *= bw / flow_bw_;
  fractions_.saturated = fractions_.utilization > 1.0 + 1e-12;
  flow_bw_ = bw;
  loads_ = link_loads(*topo_, pop_.flows(), routes_, routing_);
}

FloodObservation Simulation::advance_traffic() {
  ++round_;
  const Step now = round_;
  trace_.clear();
  NetworkView net{*topo_, routes_, routing_, loads_};
  auto benign = [&] {
    benign_step(pop_, net, cfg_.rehome_ratio, now, benign_rng_);
    trace_.push_back("benign_step");
  };
  auto attack = [&] {
    LinkMap view = attacker_observe(routes_, routing_, loads_);
    auto power = attack_power(pop_, *topo_, view, plan_.origin, plan_.target, cfg_.reuse_ratio, flow_bw_, plan_.any_path);
    plan_.target_links = select_target_links(*topo_, view, plan_.origin, plan_.target, plan_.mode, plan_.budget,
                                             &power, cfg_.threshold);
    launch_wave(pop_, net, plan_, cfg_.reuse_ratio, flow_bw_, cfg_.threshold, now, attack_rng_);
    trace_.push_back("attack_wave");
  };
  if (cfg_.benign_first) {
    benign();
    attack();
  } else {
    attack();
    benign();
  }
  loads_ = link_loads(*topo_, pop_.flows(), routes_, routing_);
  FloodObservation obs = detect_floods(*topo_, pop_.flows(), routes_, routing_, loads_, cfg_.threshold, now);
  trace_.push_back("detect_floods");
  return obs;
}

bool Simulation::probe_first_wave() {
  FloodObservation obs = advance_traffic();
  for (LinkId l : plan_.target_links) {
    if (!obs.flooded_links.count(l)) continue;
    for (const Flow& f : pop_.flows()) {
      if (!f.active || pop_.entity(f.origin).kind != EntityKind::Bot) continue;
      if (flow_path(routes_, routing_, f).contains(l)) return true;
    }
  }
  return false;
}

void Simulation::respond(const FloodObservation& raw) {
  if (raw.flooded_links.empty()) {
    if (++failed_ >= cfg_.max_failed_waves) terminated_ = true;
    return;
  }
  failed_ = 0;
  ++ariel_t_;
  FloodObservation obs = raw;
  obs.time = ariel_t_;
  // Flow classification heuristics would run here; none are configured.
  FloodObservation filtered = filter_shadowed_links(obs);
  trace_.push_back("filter_shadowed_links");
  store_.ingest(filtered);
  trace_.push_back("ingest");

  switch (cfg_.dissolution) {
    case Dissolution::None: break;
    case Dissolution::Timeout: store_.dissolve_timeout(ariel_t_, cfg_.timeout); break;
    case Dissolution::Strength: store_.dissolve_strength(cfg_.strength_a, cfg_.strength_b, ariel_t_); break;
    case Dissolution::TopX: store_.dissolve_topx(cfg_.top_x); break;
  }
  trace_.push_back("dissolve");

  PinRequest req;
  req.observation = filtered;
  for (const Relation& r : store_.entity_relations()) req.suspects.insert(r.left);
  for (const Relation& r : store_.top_relations(cfg_.pin_targets, RelationKind::AnyNode))
    req.implicated_nodes.push_back(r.right);
  trace_.push_back("relations");

  const std::uint64_t te_seed = mix_seed(seed_, 1000 + static_cast<std::uint64_t>(round_));
  TeResult r;
  if (cfg_.mapping == Mapping::Optimal) {
    r = reroute_optimal(*topo_, *paths_, pop_.flows(), routing_, req, dest_, te_seed);
  } else {
    r.routes = effective_routes(*topo_, *paths_, routing_.pins, &routing_.pin_triggers);
    r.fractions = solve_load_fractions(*topo_, r.routes, aggregate_demand(pop_.flows()));
    r.routing = map_flows_random(pop_.flows(), r.routes, r.fractions, te_seed, routing_.pins);
    r.routing.pin_triggers = routing_.pin_triggers;
  }
  trace_.push_back("solve_load_fractions");
  trace_.push_back("map_flows");
  routes_ = std::move(r.routes);
  routing_ = std::move(r.routing);
  routing_.epoch = ariel_t_;
  fractions_ = std::move(r.fractions);
  loads_ = link_loads(*topo_, pop_.flows(), routes_, routing_);
  update_destination_model(dest_, pop_.flows());
  trace_.push_back("update_destination_model");
}

void Simulation::fill_delta_s(StepMetrics& m) const {
  const NodeId target = plan_.target;
  auto is_bot = [&](const Relation& r) { return pop_.entity(r.left).kind == EntityKind::Bot; };
  auto is_target = [&](const Relation& r) { return r.right == target; };
  auto both = [&](const Relation& r) { return is_bot(r) && is_target(r); };
  auto er = store_.entity_relations();
  auto nr = store_.node_relations();
  auto pr = store_.pair_relations();
  m.delta_entity = delta_s(supports_where(er, true, is_bot), supports_where(er, false, is_bot));
  m.delta_node = delta_s(supports_where(nr, true, is_target), supports_where(nr, false, is_target));
  m.delta_pair = delta_s(supports_where(pr, true, both), supports_where(pr, false, both));
}

void Simulation::step() {
  if (terminated_) {
    StepMetrics m = metrics_.empty() ? StepMetrics{} : metrics_.back();
    m.step = ++round_;
    m.success = 0.0;
    m.participation = 0.0;
    m.flooded_links = 0;
    m.terminated = true;
    metrics_.push_back(m);
    return;
  }
  StepMetrics m;
  try {
    FloodObservation obs = advance_traffic();
    m.step = round_;
    m.success = attack_success(plan_, obs);
    m.flooded_links = obs.flooded_links.size();

    std::size_t joined = 0, active_bot_flows = 0;
    for (const Entity& e : pop_.entities()) {
      if (e.kind != EntityKind::Bot) continue;
      bool any = false;
      for (const Flow& f : pop_.flows_of(e.id)) {
        if (!f.active) continue;
        ++active_bot_flows;
        any = any || f.birth == round_;
      }
      joined += any;
    }
    const std::size_t bots = pop_.bot_count();
    m.participation = bots ? static_cast<double>(joined) / static_cast<double>(bots) : 0.0;
    DecoyIndex index(*topo_, routes_, routing_, plan_.target, plan_.target_links, plan_.any_path);
    std::size_t usable = usable_spare_slots(pop_, index, plan_.target_links) +
                         (plan_.target_links.empty() ? 0 : percent_of(cfg_.reuse_ratio, active_bot_flows));
    m.availability = bots ? static_cast<double>(usable) / static_cast<double>(bots * pop_.max_conns()) : 0.0;

    respond(obs);
    last_obs_ = std::move(obs);
  } catch (const Error& e) {
    throw Error(e.code(), "step " + std::to_string(round_) + ": " + e.what());
  }
  fill_delta_s(m);
  m.ariel_t = ariel_t_;
  m.utilization = fractions_.utilization;
  m.saturated = fractions_.saturated;
  m.terminated = terminated_;
  metrics_.push_back(m);
}

void Simulation::run() {
  while (round_ < cfg_.horizon) step();
}

Bandwidth calibrate_flow_bw(std::shared_ptr<const Topology> topo, const ExperimentConfig& cfg, std::uint64_t seed) {
  const Simulation base(topo, cfg, seed, 1.0);
  auto floods = [&](Bandwidth bw) {
    Simulation s = base;
    s.set_flow_bandwidth(bw);
    return s.probe_first_wave();
  };
  const double lo0 = cfg.calibrate_min, hi0 = cfg.calibrate_max;
  constexpr int kScan = 64;
  std::optional<int> first;
  double prev = lo0, hit = lo0;
  for (int i = 0; i <= kScan; ++i) {
    double bw = i == kScan ? hi0 : lo0 * std::pow(hi0 / lo0, static_cast<double>(i) / kScan);
    if (floods(bw)) {
      first = i;
      hit = bw;
      break;
    }
    prev = bw;
  }
  if (!first) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "no flow_bw in [%.6g, %.6g] floods a target link (seed %llu)", lo0, hi0,
                  static_cast<unsigned long long>(seed));
    throw Error(ErrorCode::Calibration, buf);
  }
  if (*first == 0) return lo0;
  double lo = prev, hi = hit;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (floods(mid) ? hi : lo) = mid;
  }
  return hi;
}

std::optional<double> t_half_width(const std::vector<double>& v) {
  if (v.size() < 2) return std::nullopt;
  const double n = static_cast<double>(v.size());
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / (n - 1));
  boost::math::students_t dist(n - 1);
  double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  return q * sd / std::sqrt(n);
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::Argument, "pearson: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs) {
  validate(cfg);
  return run_experiment(std::make_shared<const Topology>(load_experiment_topology(cfg)), cfg, jobs);
}

ExperimentResult run_experiment(std::shared_ptr<const Topology> topo, const ExperimentConfig& cfg, std::size_t jobs) {
  validate(cfg);
  ExperimentResult res;
  res.runs.resize(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());

  auto one = [&](std::size_t i) {
    try {
      const std::uint64_t seed = cfg.seeds[i];
      Bandwidth bw = cfg.flow_bw ? *cfg.flow_bw : calibrate_flow_bw(topo, cfg, seed) * cfg.flow_bw_scale;
      Simulation sim(topo, cfg, seed, bw);
      sim.run();
      RunResult& r = res.runs[i];
      r.seed = seed;
      r.flow_bw = bw;
      r.steps = sim.metrics();
      r.store = sim.store();
      r.routing = sim.routing();
      r.routes = sim.routes();
      r.fractions = sim.fractions();
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, cfg.seeds.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) one(i);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (next >= cfg.seeds.size()) return;
            i = next++;
          }
          one(i);
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const auto& names = metric_names();
  for (Step s = 0; s < cfg.horizon; ++s) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      std::vector<double> v;
      for (const RunResult& r : res.runs) v.push_back(metric_value(r.steps[static_cast<std::size_t>(s)], k));
      AggregateRow row;
      row.step = s + 1;
      row.metric = names[k];
      row.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      row.half_width = t_half_width(v);
      res.aggregate.push_back(row);
    }
  }
  return res;
}

}  // namespace ariel
