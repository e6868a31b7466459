#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>

#include "ariel/config.hpp"
#include "ariel/report.hpp"
#include "doctest.h"

using namespace ariel;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  return "";
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

ExperimentConfig tiny() {
  ExperimentConfig cfg;
  cfg.topology = "grid:3";
  cfg.bots = 40;
  cfg.benign = 40;
  cfg.capacity = 4e7;
  cfg.horizon = 4;
  cfg.seeds = {1, 2};
  return cfg;
}

}  // namespace

TEST_CASE("settings parse and name bad keys") {
  ExperimentConfig c;
  apply_setting(c, "reuse_ratio", "75");
  CHECK(c.reuse_ratio == 75);
  apply_setting(c, "mapping", "optimal");
  CHECK(c.mapping == Mapping::Optimal);
  apply_setting(c, "attack_mode", "afferent");
  CHECK(c.attack_mode == AttackMode::HorizontalAfferent);
  apply_setting(c, "benign_first", "off");
  CHECK(!c.benign_first);
  apply_setting(c, "seeds", "1..5");
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  apply_setting(c, "seeds", "9, 3..4");
  CHECK(c.seeds == std::vector<std::uint64_t>{9, 3, 4});
  apply_setting(c, "flow_bw", "4e5");
  CHECK(c.flow_bw == 4e5);
  apply_setting(c, "flow_bw", "auto");
  CHECK(!c.flow_bw);

  CHECK(error_of([&] { apply_setting(c, "reuse_rate", "5"); }).find("'reuse_rate'") != std::string::npos);
  CHECK(error_of([&] { apply_setting(c, "bots", "-3"); }).find("'bots'") != std::string::npos);
  CHECK(error_of([&] { apply_setting(c, "mapping", "greedy"); }).find("greedy") != std::string::npos);
  CHECK(error_of([&] { apply_setting(c, "seeds", "5..2"); }).find("'seeds'") != std::string::npos);
  CHECK(error_of([&] { apply_setting(c, "threshold", "x1"); }).find("'threshold'") != std::string::npos);
}

TEST_CASE("describe round-trips through apply_setting") {
  ExperimentConfig c;
  c.reuse_ratio = 37.5;
  c.flow_bw = 123456.789;
  c.mapping = Mapping::Optimal;
  c.dissolution = Dissolution::Strength;
  c.seeds = {4, 8};
  c.origin = "0_0";
  ExperimentConfig back;
  for (const auto& [k, v] : describe(c)) apply_setting(back, k, v);
  CHECK(describe(back) == describe(c));
}

TEST_CASE("batch files and sweep expansion") {
  const char* text = R"(# base
reuse_ratio = 10
rehome_ratio = 20   ; trailing comment
topologies = a.gml, grid:4
out = results

[sweep]
reuse_ratio = 0, 25, 50, 75
mapping = random, optimal
)";
  BatchSpec spec = parse_batch(text, "/data/exp");
  CHECK(spec.base.reuse_ratio == 10);
  CHECK(spec.base.rehome_ratio == 20);
  CHECK(spec.topologies == std::vector<std::string>{"/data/exp/a.gml", "grid:4"});
  CHECK(spec.out_dir == "/data/exp/results");
  REQUIRE(spec.axes.size() == 2);

  auto cells = expand_sweep(spec);
  REQUIRE(cells.size() == 8);
  CHECK(cells[0].coords == std::vector<std::pair<std::string, std::string>>{{"reuse_ratio", "0"}, {"mapping", "random"}});
  CHECK(cells[1].cfg.mapping == Mapping::Optimal);
  CHECK(cells[7].cfg.reuse_ratio == 75);
  CHECK(cells[7].cfg.rehome_ratio == 20);

  BatchSpec flat = parse_batch("horizon = 7\n");
  auto one = expand_sweep(flat);
  REQUIRE(one.size() == 1);
  CHECK(one[0].coords.empty());
  CHECK(one[0].cfg.horizon == 7);
}

TEST_CASE("batch errors") {
  CHECK(error_of([] { parse_batch("reuse = 5\n"); }).find("'reuse'") != std::string::npos);
  CHECK(error_of([] { parse_batch("[sweep]\nseeds = 1,2\n"); }).find("'seeds'") != std::string::npos);
  CHECK(error_of([] { parse_batch("[sweep]\nreuse_ratio = 1\nreuse_ratio = 2\n"); }).find("twice") !=
        std::string::npos);
  CHECK(error_of([] { parse_batch("[sweep]\nreuse_ratio = 10, 150\n"); }).find("reuse_ratio") != std::string::npos);
  CHECK(error_of([] { parse_batch("[sweep]\nmapping = ,\n"); }).find("'mapping'") != std::string::npos);
  CHECK(error_of([] { parse_batch("[other]\n"); }).find("other") != std::string::npos);
  CHECK(error_of([] { parse_batch("just words\n"); }).find("line 1") != std::string::npos);
  CHECK_THROWS_AS(load_batch("/nonexistent/exp.conf"), Error);
}

TEST_CASE("split_list trims and drops empties") {
  CHECK(split_list(" a, b ,,c ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_list("").empty());
}

TEST_CASE("CSV shape and number round trip") {
  ExperimentConfig cfg = tiny();
  ExperimentResult res = run_experiment(cfg);
  std::ostringstream out;
  write_csv_header(out, {"reuse_ratio"});
  write_csv_rows(out, res, {{"reuse_ratio", "0"}});
  auto rows = lines(out.str());
  REQUIRE(!rows.empty());
  CHECK(rows[0] == std::string("reuse_ratio,") + kCsvColumns);
  CHECK(rows.size() - 1 == csv_row_count(res));
  // Per seed: horizon x metrics rows.
  CHECK(csv_row_count(res) == (cfg.seeds.size() + 1) * static_cast<std::size_t>(cfg.horizon) * metric_names().size());

  std::size_t runs = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    auto f = fields(rows[i]);
    REQUIRE(f.size() == 8);
    double value = std::strtod(f[6].c_str(), nullptr);
    if (f[1] == "run") {
      ++runs;
      std::uint64_t seed = std::stoull(f[2]);
      std::size_t r = seed == cfg.seeds[0] ? 0 : 1;
      std::size_t step = std::stoul(f[3]);
      std::size_t k = static_cast<std::size_t>(
          std::find(metric_names().begin(), metric_names().end(), f[5]) - metric_names().begin());
      double orig = metric_value(res.runs[r].steps[step - 1], k);
      CHECK(value == orig);
      char a[32], b[32];
      std::snprintf(a, sizeof a, "%.12g", value);
      std::snprintf(b, sizeof b, "%.12g", orig);
      CHECK(std::string(a) == b);
      CHECK(f[7].empty());
    } else {
      CHECK(f[1] == "mean");
      CHECK(f[2].empty());
      CHECK(!f[7].empty());
    }
  }
  CHECK(runs == cfg.seeds.size() * static_cast<std::size_t>(cfg.horizon) * metric_names().size());
  CHECK(format_number(0.1) == "0.10000000000000001");
}

TEST_CASE("summary JSON and TE dump") {
  ExperimentConfig cfg = tiny();
  cfg.mapping = Mapping::Optimal;
  cfg.reuse_ratio = 75;
  ExperimentResult res = run_experiment(cfg);
  std::ostringstream js;
  write_summary_json(js, cfg, res);
  CHECK(js.str().find("\"at_horizon\"") != std::string::npos);
  CHECK(js.str().find("\"mapping\": \"optimal\"") != std::string::npos);

  auto topo = load_experiment_topology(cfg);
  std::ostringstream te;
  write_te_dump(te, topo, res.runs[0]);
  CHECK(te.str().rfind("# seed 1 ", 0) == 0);
  CHECK(te.str().find("flows_per_path_index") != std::string::npos);
}

TEST_CASE("topology report skips bad rows and guards zero variance") {
  ExperimentConfig cfg = tiny();
  cfg.seeds = {1};
  TopoReport rep = topo_report({"grid:3", "grid:3", "grid:3", "/nonexistent/zoo.gml"}, cfg);
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.rows[3].error.find("zoo.gml") != std::string::npos);
  CHECK(rep.rows[0].nodes == 9);
  CHECK(rep.rows[0].links == 12);
  CHECK(rep.rows[0].avg_spl == doctest::Approx(2.0));
  CHECK(rep.rows[0].diameter == 4);
  CHECK(!rep.pearson_r);  // identical rows: zero variance

  std::ostringstream out;
  write_topo_csv(out, rep);
  auto rows = lines(out.str());
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "source,name,nodes,links,avg_spl,diameter,delta_s_entity,error");
  CHECK(rows[5] == "pearson_avg_spl_delta_s,,,,,,undefined,");

  TopoReport two = topo_report({"grid:3", "grid:4"}, cfg);
  CHECK(!two.pearson_r);  // fewer than 3 usable rows
}
