#include <algorithm>
#include <cmath>
#include <random>

#include "ariel/lp.hpp"
#include "ariel/te_engine.hpp"
#include "doctest.h"

using namespace ariel;

namespace {

std::vector<Flow> make_flows(std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, double>> spec) {
  std::vector<Flow> flows;
  for (auto [e, a, b, bw] : spec) {
    Flow f;
    f.id = FlowId{static_cast<std::uint32_t>(flows.size())};
    f.origin = EntityId{e};
    f.src = NodeId{a};
    f.dst = NodeId{b};
    f.bandwidth = bw;
    f.active = true;
    flows.push_back(f);
  }
  return flows;
}

// Two parallel 2-hop routes between node 0 and node 3.
Topology diamond(double cap) {
  Topology t;
  for (int i = 0; i < 4; ++i) t.add_node(std::to_string(i));
  t.add_link(NodeId{0}, NodeId{1}, cap);
  t.add_link(NodeId{1}, NodeId{3}, cap);
  t.add_link(NodeId{0}, NodeId{2}, cap);
  t.add_link(NodeId{2}, NodeId{3}, cap);
  return t;
}

}  // namespace

TEST_CASE("bounded simplex on small programs") {
  // max x + y, x + 2y <= 4, 3x + y <= 6, x <= 1.5
  BoundedLp lp;
  lp.A = {{1, 2}, {3, 1}};
  lp.b = {4, 6};
  lp.c = {1, 1};
  lp.upper = {1.5, kInf};
  auto sol = solve_bounded_lp(lp);
  CHECK(sol.objective == doctest::Approx(2.75));  // x at its bound, y = 1.25
  CHECK(sol.x[0] == doctest::Approx(1.5));
  CHECK(sol.x[0] + 2 * sol.x[1] <= 4 + 1e-9);
  CHECK(3 * sol.x[0] + sol.x[1] <= 6 + 1e-9);

  // secondary objective breaks ties among primary optima
  BoundedLp tie;
  tie.A = {{1, 1}};
  tie.b = {1};
  tie.c = {1, 1};
  tie.c2 = {0, 1};
  tie.upper = {1, 1};
  auto t = solve_bounded_lp(tie);
  CHECK(t.x[1] == doctest::Approx(1.0));
  CHECK(t.x[0] == doctest::Approx(0.0));

  BoundedLp unbounded;
  unbounded.A = {{-1}};
  unbounded.b = {1};
  unbounded.c = {1};
  unbounded.upper = {kInf};
  CHECK_THROWS_AS(solve_bounded_lp(unbounded), Error);
}

TEST_CASE("bounded simplex against vertex enumeration") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coef(-1.0, 2.0), rhs(0.5, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    BoundedLp lp;
    for (int i = 0; i < 3; ++i) {
      lp.A.push_back({coef(rng), coef(rng)});
      lp.b.push_back(rhs(rng));
    }
    lp.c = {coef(rng), coef(rng)};
    lp.upper = {rhs(rng), rhs(rng)};
    auto sol = solve_bounded_lp(lp);
    // grid scan of the 2-D box is an oracle for the maximum
    double best = -1e300;
    const int steps = 600;
    for (int a = 0; a <= steps; ++a)
      for (int b = 0; b <= steps; ++b) {
        double x = lp.upper[0] * a / steps, y = lp.upper[1] * b / steps;
        bool ok = true;
        for (int i = 0; i < 3; ++i) ok &= lp.A[i][0] * x + lp.A[i][1] * y <= lp.b[i] + 1e-12;
        if (ok) best = std::max(best, lp.c[0] * x + lp.c[1] * y);
      }
    CHECK(sol.objective >= best - 1e-9);
    CHECK(sol.objective <= best + 0.03);
    for (int i = 0; i < 3; ++i) CHECK(lp.A[i][0] * sol.x[0] + lp.A[i][1] * sol.x[1] <= lp.b[i] + 1e-9);
  }
}

TEST_CASE("load fractions examples") {
  SUBCASE("symmetric split") {
    Topology t = diamond(10);
    PathSet ps(t, 2);
    TrafficMatrix m;
    m.demand[{NodeId{0}, NodeId{3}}] = 10;
    auto f = solve_load_fractions(t, ps, m);
    auto v = f.fractions.at({NodeId{0}, NodeId{3}});
    CHECK(v[0] == doctest::Approx(0.5));
    CHECK(v[1] == doctest::Approx(0.5));
    CHECK(f.utilization == doctest::Approx(0.5));
    CHECK_FALSE(f.saturated);
  }
  SUBCASE("single path at capacity") {
    Topology t = make_line(3, 10);
    PathSet ps(t, 2);
    TrafficMatrix m;
    m.demand[{NodeId{0}, NodeId{2}}] = 10;
    auto f = solve_load_fractions(t, ps, m);
    CHECK(f.fractions.at({NodeId{0}, NodeId{2}})[0] == 1.0);
    CHECK(f.utilization == doctest::Approx(1.0));
    m.demand[{NodeId{0}, NodeId{2}}] = 20;
    CHECK(solve_load_fractions(t, ps, m).saturated);
  }
  SUBCASE("demand without a path") {
    Topology t;
    t.add_node("a");
    t.add_node("b");
    PathSet ps(t, 2);
    TrafficMatrix m;
    m.demand[{NodeId{0}, NodeId{1}}] = 1;
    try {
      solve_load_fractions(t, ps, m);
      FAIL("expected infeasibility");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Infeasible);
      CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
    }
  }
  SUBCASE("slack pairs stay on the shorter path") {
    Topology t = make_grid(3, 100);
    PathSet ps(t, 2);
    TrafficMatrix m;
    m.demand[{NodeId{0}, NodeId{2}}] = 100;  // sets the utilization
    m.demand[{NodeId{6}, NodeId{7}}] = 1;    // 1 hop vs 3 hops, far from the bottleneck
    auto f = solve_load_fractions(t, ps, m);
    CHECK(f.utilization == doctest::Approx(0.5));
    CHECK(f.fractions.at({NodeId{6}, NodeId{7}})[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("load fractions against grid search on random 4-node instances") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> cap(5, 20), dem(1, 15);
  for (int inst = 0; inst < 50; ++inst) {
    Topology t = make_full_mesh(4, 1.0);
    Topology g;
    for (int i = 0; i < 4; ++i) g.add_node(std::to_string(i));
    for (const Link& l : t.links()) g.add_link(l.src, l.dst, cap(rng));
    PathSet ps(g, 2);
    TrafficMatrix m;
    std::vector<NodePair> pairs{{NodeId{0}, NodeId{3}}, {NodeId{1}, NodeId{2}}};
    for (auto p : pairs) m.demand[p] = dem(rng);
    auto f = solve_load_fractions(g, ps, m);

    double best = 1e300;
    for (int a = 0; a <= 100; ++a)
      for (int b = 0; b <= 100; ++b) {
        std::vector<double> load(g.link_count(), 0.0);
        double fa = a / 100.0, fb = b / 100.0;
        auto add = [&](NodePair p, double f1) {
          auto paths = ps.paths(p);
          for (LinkId l : paths[0].links) load[l.value] += f1 * m.demand[p];
          for (LinkId l : paths[1].links) load[l.value] += (1 - f1) * m.demand[p];
        };
        add(pairs[0], fa);
        add(pairs[1], fb);
        double u = 0;
        for (const Link& l : g.links()) u = std::max(u, load[l.id.value] / l.capacity);
        best = std::min(best, u);
      }
    CHECK(f.utilization <= best + 1e-2);
    CHECK(f.utilization >= best - 0.05);
    for (auto p : pairs) {
      auto v = f.fractions.at(p);
      CHECK(v[0] + v[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("link loads") {
  Topology t = make_line(4, 10);
  RouteTable routes = effective_routes(t, PathSet(t, 2), {});
  auto flows = make_flows({{0, 0, 3, 5}});
  RoutingConfig cfg;
  cfg.path_index = {0};
  auto load = link_loads(t, flows, routes, cfg);
  double sum = 0;
  for (double v : load) sum += v;
  CHECK(sum == 15);
  for (LinkId l : routes.at({NodeId{0}, NodeId{3}})[0].links) CHECK(load[l.value] == 5);

  CHECK(link_loads(t, std::span<const Flow>{}, routes, cfg) == std::vector<Bandwidth>(t.link_count(), 0.0));
  cfg.path_index = {-1};
  try {
    link_loads(t, flows, routes, cfg);
    FAIL("expected consistency error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Consistency);
  }
}

TEST_CASE("random mapping") {
  Topology t = diamond(1000);
  PathSet ps(t, 2);
  RouteTable routes = effective_routes(t, ps, {});
  NodePair pair{NodeId{0}, NodeId{3}};

  LoadFractions one;
  one.fractions[pair] = {1.0, 0.0};
  auto single = make_flows({{0, 0, 3, 1}});
  CHECK(map_flows_random(single, routes, one, 5).path_index[0] == 0);

  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, double>> spec;
  for (std::uint32_t i = 0; i < 1000; ++i) spec.emplace_back(i, 0, 3, 1.0);
  auto flows = make_flows(spec);
  LoadFractions half;
  half.fractions[pair] = {0.5, 0.5};
  auto a = map_flows_random(flows, routes, half, 99);
  auto b = map_flows_random(flows, routes, half, 99);
  CHECK(a.path_index == b.path_index);
  int on0 = static_cast<int>(std::count(a.path_index.begin(), a.path_index.end(), 0));
  CHECK(std::abs(on0 - 500) <= 1);

  LoadFractions skew;
  skew.fractions[pair] = {0.3, 0.7};
  auto c = map_flows_random(flows, routes, skew, 1);
  int c0 = static_cast<int>(std::count(c.path_index.begin(), c.path_index.end(), 0));
  CHECK(std::abs(c0 - 300) <= 1);
}

TEST_CASE("destination model smoothing") {
  DestinationModel m(10);
  EntityId e{1};
  CHECK(m.probability(e, NodeId{4}) == doctest::Approx(0.1));
  for (int i = 0; i < 3; ++i) m.observe(e, NodeId{1});
  CHECK(m.probability(e, NodeId{1}) == doctest::Approx(4.0 / 5.0));
  CHECK(m.unseen_mass(e) == doctest::Approx(1.0 / 5.0));

  DestinationModel two(5);
  two.observe(e, NodeId{1});
  two.observe(e, NodeId{2});
  CHECK(two.probability(e, NodeId{1}) == doctest::Approx(0.4));
  CHECK(two.probability(e, NodeId{2}) == doctest::Approx(0.4));
  CHECK(two.unseen_mass(e) == doctest::Approx(0.2));
  double total = 0;
  for (std::uint32_t n = 0; n < 5; ++n) total += two.probability(e, NodeId{n});
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("pins splice routes hop by hop") {
  Topology t = make_grid(3, 1);
  PathSet ps(t, 2);
  auto detour = k_shortest_paths(t, NodeId{4}, NodeId{8}, 6).back();
  std::map<NodePair, Path> pins{{{NodeId{4}, NodeId{8}}, detour}};
  for (std::uint32_t a = 0; a < 8; ++a) {
    for (const Path& p : effective_paths(t, ps, pins, {NodeId{a}, NodeId{8}})) {
      CHECK(is_simple_path(t, p));
      CHECK(t.link(p.links.front()).src == NodeId{a});
      CHECK(t.link(p.links.back()).dst == NodeId{8});
    }
  }
  auto pinned = effective_paths(t, ps, pins, {NodeId{4}, NodeId{8}});
  REQUIRE(pinned.size() == 1);
  CHECK(pinned[0] == detour);
}

TEST_CASE("pin candidate ranking") {
  SUBCASE("uniform model prefers the shortest candidate") {
    Topology t = make_ring(8, 1);
    PathSet ps(t, 2);
    std::vector<std::uint32_t> none(t.link_count(), 0);
    DestinationModel model(t.node_count());
    auto ranked = rank_pin_candidates(t, ps, {NodeId{0}, NodeId{3}}, none, {}, model);
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].path.hops() == 3);
    CHECK(ranked[1].path.hops() == 5);
  }
  SUBCASE("likely destinations are avoided among equal lengths") {
    Topology t = make_grid(2, 1);  // 0-1 / 2-3
    PathSet ps(t, 2);
    std::vector<std::uint32_t> none(t.link_count(), 0);
    DestinationModel model(t.node_count());
    EntityId e{7};
    for (int i = 0; i < 20; ++i) model.observe(e, NodeId{1});
    auto ranked = rank_pin_candidates(t, ps, {NodeId{0}, NodeId{3}}, none, {e}, model);
    REQUIRE(ranked.size() >= 2);
    auto nodes = path_nodes(t, ranked[0].path);
    CHECK(std::find(nodes.begin(), nodes.end(), NodeId{1}) == nodes.end());
  }
  SUBCASE("full mesh pins are single links") {
    Topology t = make_full_mesh(10, 1);
    PathSet ps(t, 2);
    std::vector<std::uint32_t> none(t.link_count(), 0);
    DestinationModel model(t.node_count());
    for (std::uint32_t a = 0; a < 10; ++a)
      for (std::uint32_t b = 0; b < 10; ++b) {
        if (a == b) continue;
        auto ranked = rank_pin_candidates(t, ps, {NodeId{a}, NodeId{b}}, none, {}, model);
        CHECK(ranked.front().path.hops() == 1);
      }
  }
}

TEST_CASE("optimal mapping keeps suspicious flows off pins") {
  Topology t = diamond(100);
  PathSet ps(t, 2);
  NodePair pair{NodeId{0}, NodeId{3}};
  std::map<NodePair, Path> pins{{{NodeId{1}, NodeId{3}}, ps.paths({NodeId{1}, NodeId{3}})[0]}};
  RouteTable routes = effective_routes(t, ps, pins);
  auto flows = make_flows({{1, 0, 3, 1}, {2, 0, 3, 1}, {3, 0, 3, 1}, {4, 0, 3, 1}});
  LoadFractions f;
  f.fractions[pair] = {0.5, 0.5};
  std::set<EntityId> suspects{EntityId{1}, EntityId{2}};
  auto cfg = map_flows_optimal(flows, t, routes, f, pins, suspects, 3);
  const auto& paths = routes.at(pair);
  for (int i = 0; i < 2; ++i) {
    const Path& p = paths[static_cast<std::size_t>(cfg.path_index[static_cast<std::size_t>(i)])];
    for (LinkId l : pins.begin()->second.links) CHECK_FALSE(p.contains(l));
  }
  int on0 = static_cast<int>(std::count(cfg.path_index.begin(), cfg.path_index.end(), 0));
  CHECK(on0 == 2);
}
