#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "ariel/report.hpp"
#include "ariel/simulator.hpp"
#include "doctest.h"

using namespace ariel;

namespace {

LinkId link_between(const Topology& t, std::uint32_t a, std::uint32_t b) {
  for (LinkId l : t.out_links(NodeId{a}))
    if (t.link(l).dst == NodeId{b}) return l;
  FAIL("no link " << a << "->" << b);
  return LinkId{};
}

Flow make_flow(std::uint32_t id, std::uint32_t origin, std::uint32_t a, std::uint32_t b, double bw, Step birth) {
  Flow f;
  f.id = FlowId{id};
  f.origin = EntityId{origin};
  f.src = NodeId{a};
  f.dst = NodeId{b};
  f.bandwidth = bw;
  f.birth = birth;
  f.active = true;
  return f;
}

// Small and quick: 3x3 grid, 60 + 60 entities.
ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.topology = "grid:3";
  cfg.bots = 60;
  cfg.benign = 60;
  cfg.capacity = 6e7;
  cfg.horizon = 6;
  cfg.seeds = {1, 2, 3};
  return cfg;
}

std::string csv_of(const ExperimentResult& res) {
  std::ostringstream out;
  write_csv_header(out);
  write_csv_rows(out, res);
  return out.str();
}

}  // namespace

TEST_CASE("flood boundary is inclusive") {
  Topology t = make_line(2, 10);
  RouteTable routes = effective_routes(t, PathSet(t, 1), {});
  RoutingConfig routing;
  routing.path_index = {0};
  std::vector<Flow> flows{make_flow(0, 0, 0, 1, 10, 1)};
  std::vector<Bandwidth> loads = link_loads(t, flows, routes, routing);
  LinkId l = link_between(t, 0, 1);
  CHECK(detect_floods(t, flows, routes, routing, loads, 1.0, 1).flooded_links.count(l) == 1);
  loads[l.value] = 9.999;
  CHECK(detect_floods(t, flows, routes, routing, loads, 1.0, 1).flooded_links.empty());
  loads[l.value] = 5;
  CHECK(detect_floods(t, flows, routes, routing, loads, 0.5, 1).flooded_links.count(l) == 1);
}

TEST_CASE("only flows born this step make suspects") {
  Topology t = make_line(2, 10);
  RouteTable routes = effective_routes(t, PathSet(t, 1), {});
  RoutingConfig routing;
  routing.path_index = {0, 0};
  std::vector<Flow> flows{make_flow(0, 0, 0, 1, 5, 3), make_flow(1, 1, 0, 1, 5, 4)};
  auto loads = link_loads(t, flows, routes, routing);
  auto obs = detect_floods(t, flows, routes, routing, loads, 1.0, 4);
  LinkId l = link_between(t, 0, 1);
  CHECK(obs.suspects_of(l) == std::set<EntityId>{EntityId{1}});
  CHECK(obs.nodes_of(l) == std::set<NodeId>{NodeId{1}});
}

TEST_CASE("downstream nodes on a 3-node path match route expansion") {
  Topology t = make_line(3, 10);
  RouteTable routes = effective_routes(t, PathSet(t, 1), {});
  std::vector<Flow> flows;
  std::uint32_t id = 0;
  for (std::uint32_t a = 0; a < 3; ++a)
    for (std::uint32_t b = 0; b < 3; ++b)
      if (a != b) flows.push_back(make_flow(id, id, a, b, 1, 1)), ++id;
  RoutingConfig routing;
  routing.path_index.assign(flows.size(), 0);
  auto loads = link_loads(t, flows, routes, routing);
  auto obs = detect_floods(t, flows, routes, routing, loads, 0.01, 1);
  REQUIRE(obs.flooded_links.size() == t.link_count());

  for (const Link& l : t.links()) {
    std::set<NodeId> expect;
    for (const Flow& f : flows) {
      auto nodes = path_nodes(t, routes.at(f.pair())[0]);
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        if (nodes[i] == l.src && nodes[i + 1] == l.dst)
          for (std::size_t j = i + 1; j < nodes.size(); ++j) expect.insert(nodes[j]);
    }
    CHECK(obs.nodes_of(l.id) == expect);
  }
  // The middle node's outgoing link toward 2 serves only node 2.
  CHECK(obs.nodes_of(link_between(t, 1, 2)) == std::set<NodeId>{NodeId{2}});
  CHECK(obs.nodes_of(link_between(t, 0, 1)) == std::set<NodeId>{NodeId{1}, NodeId{2}});
}

TEST_CASE("delta_s arithmetic") {
  CHECK(delta_s({5, 5, 4}, {1, 1, 0}) == doctest::Approx(4.0));
  CHECK(delta_s({3, 5}, {}) == doctest::Approx(4.0));
  CHECK(delta_s({}, {2, 4}) == doctest::Approx(-3.0));
  CHECK(delta_s({2, 2}, {2, 2, 2}) == 0.0);
  CHECK(delta_s({}, {}) == 0.0);
}

TEST_CASE("attack success ratio") {
  AttackPlan plan;
  plan.target_links = {LinkId{1}, LinkId{4}};
  FloodObservation obs;
  CHECK(attack_success(plan, obs) == 0.0);
  obs.flooded_links = {LinkId{4}, LinkId{7}};
  CHECK(attack_success(plan, obs) == 0.5);
  obs.flooded_links.insert(LinkId{1});
  CHECK(attack_success(plan, obs) == 1.0);
  CHECK(attack_success(AttackPlan{}, obs) == 0.0);
}

TEST_CASE("hand-traced steps on a 3-node line") {
  // One bot with 2 slots at node 0; origin 0, target 2. Link 1->2 only
  // reaches the target itself, so the wave floods 0->1 with two flows to
  // decoy 1. The next wave has no slots left and the old flows stay put.
  ExperimentConfig cfg;
  cfg.topology = "line:3";
  cfg.bots = 1;
  cfg.benign = 0;
  cfg.max_conns = 2;
  cfg.capacity = 10;
  cfg.origin = "0";
  cfg.target = "2";
  cfg.seeds = {1};
  auto topo = std::make_shared<const Topology>(load_experiment_topology(cfg));
  Simulation sim(topo, cfg, 1, 5);
  LinkId l01 = link_between(*topo, 0, 1);

  sim.step();
  REQUIRE(sim.plan().target_links == std::vector<LinkId>{l01});
  CHECK(sim.last_observation().flooded_links == std::set<LinkId>{l01});
  CHECK(sim.store().el_rows() == std::set<RowEL>{{EntityId{0}, l01, 1}});
  CHECK(sim.store().ln_rows() == std::set<RowLN>{{l01, NodeId{1}, 1}});
  CHECK(sim.metrics().back().success == 1.0);
  CHECK(sim.metrics().back().participation == 1.0);

  sim.step();
  CHECK(sim.store().el_rows().size() == 1);
  CHECK(sim.store().ln_rows() == std::set<RowLN>{{l01, NodeId{1}, 1}, {l01, NodeId{1}, 2}});
  auto er = sim.store().entity_relations();
  auto nr = sim.store().node_relations();
  REQUIRE(er.size() == 1);
  REQUIRE(nr.size() == 1);
  CHECK(er[0].support == 1);
  CHECK(nr[0].support == 2);
  const StepMetrics& m = sim.metrics().back();
  CHECK(m.ariel_t == 2);
  CHECK(m.participation == 0.0);
  CHECK(m.delta_entity == 1.0);   // bot mean 1, no benign relations
  CHECK(m.delta_node == -2.0);    // the only node relation is not the target
}

TEST_CASE("stage order within a step") {
  ExperimentConfig cfg = small_config();
  auto topo = std::make_shared<const Topology>(load_experiment_topology(cfg));
  Simulation sim(topo, cfg, 1, calibrate_flow_bw(topo, cfg, 1) * 1.25);
  sim.step();
  const std::vector<std::string> expect{"benign_step",         "attack_wave",      "detect_floods",
                                        "filter_shadowed_links", "ingest",          "dissolve",
                                        "relations",           "solve_load_fractions", "map_flows",
                                        "update_destination_model"};
  CHECK(sim.trace() == expect);

  cfg.benign_first = false;
  Simulation other(topo, cfg, 1, sim.flow_bandwidth());
  other.step();
  REQUIRE(other.trace().size() >= 2);
  CHECK(other.trace()[0] == "attack_wave");
  CHECK(other.trace()[1] == "benign_step");
}

TEST_CASE("link loads are conserved every step") {
  for (Mapping mapping : {Mapping::Random, Mapping::Optimal}) {
    ExperimentConfig cfg = small_config();
    cfg.mapping = mapping;
    cfg.reuse_ratio = 50;
    auto topo = std::make_shared<const Topology>(load_experiment_topology(cfg));
    Simulation sim(topo, cfg, 2, calibrate_flow_bw(topo, cfg, 2) * 1.25);
    for (int s = 0; s < 6; ++s) {
      sim.step();
      double offered = std::accumulate(sim.loads().begin(), sim.loads().end(), 0.0);
      double expect = 0;
      for (const Flow& f : sim.population().flows())
        if (f.active) expect += f.bandwidth * static_cast<double>(flow_path(sim.routes(), sim.routing(), f).hops());
      CHECK(offered == doctest::Approx(expect).epsilon(1e-12));
      for (const Entity& e : sim.population().entities())
        CHECK(sim.population().active_flows(e.id) <= cfg.max_conns);
    }
  }
}

TEST_CASE("identical config and seeds give identical output") {
  ExperimentConfig cfg = small_config();
  cfg.mapping = Mapping::Optimal;
  cfg.reuse_ratio = 75;
  std::string a = csv_of(run_experiment(cfg, 1));
  std::string b = csv_of(run_experiment(cfg, 3));
  CHECK(a == b);
  CHECK(!a.empty());
}

TEST_CASE("horizon 0 gives an empty series") {
  ExperimentConfig cfg = small_config();
  cfg.horizon = 0;
  ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.runs.size() == 3);
  for (const RunResult& r : res.runs) CHECK(r.steps.empty());
  CHECK(res.aggregate.empty());
}

TEST_CASE("aggregates use the Student-t half-width") {
  auto hw = t_half_width({1, 2, 3});
  REQUIRE(hw);
  CHECK(*hw == doctest::Approx(4.302652729749464 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(!t_half_width({4}));
  CHECK(!t_half_width({}));
  CHECK(*t_half_width({2, 2, 2}) == 0.0);

  ExperimentConfig cfg = small_config();
  ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.aggregate.size() == static_cast<std::size_t>(cfg.horizon) * metric_names().size());
  for (const AggregateRow& a : res.aggregate) {
    std::size_t k = static_cast<std::size_t>(
        std::find(metric_names().begin(), metric_names().end(), a.metric) - metric_names().begin());
    std::vector<double> v;
    for (const RunResult& r : res.runs) v.push_back(metric_value(r.steps[static_cast<std::size_t>(a.step - 1)], k));
    CHECK(a.mean == doctest::Approx(std::accumulate(v.begin(), v.end(), 0.0) / 3.0).epsilon(1e-12));
    REQUIRE(a.half_width);
    CHECK(*a.half_width == doctest::Approx(*t_half_width(v)).epsilon(1e-12));
  }

  cfg.seeds = {4};
  ExperimentResult one = run_experiment(cfg);
  for (const AggregateRow& a : one.aggregate) CHECK(!a.half_width);
}

TEST_CASE("pearson correlation") {
  CHECK(*pearson({1, 2, 3, 4}, {3, 5, 7, 9}) == doctest::Approx(1.0));
  CHECK(*pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(!pearson({1, 2, 3}, {5, 5, 5}));
  CHECK(!pearson({1}, {2}));
  CHECK_THROWS_AS(pearson({1, 2}, {1}), Error);
}

TEST_CASE("validation names the offending field") {
  auto field_of = [](ExperimentConfig c) -> std::string {
    try {
      validate(c);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Config);
      return e.what();
    }
    return "";
  };
  ExperimentConfig c;
  CHECK(field_of(c).empty());
  c.reuse_ratio = 120;
  CHECK(field_of(c).find("reuse_ratio") != std::string::npos);
  c = ExperimentConfig{};
  c.seeds.clear();
  CHECK(field_of(c).find("seeds") != std::string::npos);
  c = ExperimentConfig{};
  c.threshold = 0;
  CHECK(field_of(c).find("threshold") != std::string::npos);
  c = ExperimentConfig{};
  c.horizon = -1;
  CHECK(field_of(c).find("horizon") != std::string::npos);
}

TEST_CASE("topology load failures name the file") {
  ExperimentConfig cfg = small_config();
  cfg.topology = "missing_file.gml";
  try {
    run_experiment(cfg);
    FAIL("expected a load error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("missing_file.gml") != std::string::npos);
  }
}

TEST_CASE("termination pads the series") {
  // Without reuse the bots run dry and the waves stop flooding.
  ExperimentConfig cfg = small_config();
  cfg.horizon = 12;
  cfg.reuse_ratio = 0;
  cfg.rehome_ratio = 100;
  ExperimentResult res = run_experiment(cfg);
  for (const RunResult& r : res.runs) {
    REQUIRE(r.steps.size() == 12);
    for (std::size_t i = 0; i < r.steps.size(); ++i) CHECK(r.steps[i].step == static_cast<Step>(i + 1));
    bool ended = false;
    for (const StepMetrics& m : r.steps) {
      if (ended) CHECK(m.terminated);
      ended = ended || m.terminated;
    }
  }
}
