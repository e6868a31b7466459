// Exercises libariel through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "ariel/ariel.h"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const char* kSmall =
    "topology = grid:3\n"
    "bots = 40\n"
    "benign = 40\n"
    "capacity = 4e7\n"
    "horizon = 4\n"
    "seeds = 1, 2\n";

struct Config {
  ariel_config* p = nullptr;
  explicit Config(const char* text) { REQUIRE(ariel_config_parse(text, nullptr, &p) == ARIEL_OK); }
  ~Config() { ariel_config_free(p); }
};

struct Result {
  ariel_result* p = nullptr;
  ~Result() { ariel_result_free(p); }
};

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "ariel_c_api_test";
  fs::create_directories(dir);
  return dir / name;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string l; std::getline(in, l);) ++n;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("status names and null handles") {
  CHECK(std::string(ariel_status_name(ARIEL_OK)) == "ok");
  CHECK(std::string(ariel_status_name(ARIEL_E_CONFIG)) == "config");
  CHECK(ariel_config_new(nullptr) == ARIEL_E_ARGUMENT);
  CHECK(std::string(ariel_last_error()).find("null") != std::string::npos);
  CHECK(ariel_run(nullptr, 1, nullptr) == ARIEL_E_ARGUMENT);
  CHECK(ariel_result_seed_count(nullptr) == 0);
  ariel_config_free(nullptr);
  ariel_result_free(nullptr);
  CHECK(std::string(ariel_version()).size() > 0);
}

TEST_CASE("config set and get") {
  ariel_config* cfg = nullptr;
  REQUIRE(ariel_config_new(&cfg) == ARIEL_OK);
  CHECK(ariel_config_set(cfg, "reuse_ratio", "75") == ARIEL_OK);
  CHECK(ariel_config_set(cfg, "reuse_rate", "75") == ARIEL_E_CONFIG);
  CHECK(std::string(ariel_last_error()).find("reuse_rate") != std::string::npos);

  char small[2];
  size_t need = 0;
  CHECK(ariel_config_get(cfg, "reuse_ratio", small, sizeof small, &need) == ARIEL_OK);
  CHECK(need == 3);
  CHECK(std::string(small) == "7");
  char buf[16];
  CHECK(ariel_config_get(cfg, "reuse_ratio", buf, sizeof buf, &need) == ARIEL_OK);
  CHECK(std::string(buf) == "75");
  CHECK(ariel_config_get(cfg, "nope", buf, sizeof buf, &need) == ARIEL_E_CONFIG);

  CHECK(ariel_config_sweep_cells(cfg) == 1);
  CHECK(ariel_config_topology_count(cfg) == 0);
  CHECK(ariel_config_add_topology(cfg, "grid:4") == ARIEL_OK);
  CHECK(ariel_config_topology_count(cfg) == 1);
  CHECK(std::string(ariel_config_out_dir(cfg)).empty());
  ariel_config_free(cfg);

  ariel_config* bad = nullptr;
  CHECK(ariel_config_parse("[sweep]\nbogus = 1\n", nullptr, &bad) == ARIEL_E_CONFIG);
  CHECK(bad == nullptr);
  CHECK(ariel_config_load("/nonexistent/x.conf", &bad) == ARIEL_E_IO);

  Config sweep("[sweep]\nreuse_ratio = 0, 25, 50, 75\nmapping = random, optimal\n");
  CHECK(ariel_config_sweep_cells(sweep.p) == 8);
}

TEST_CASE("run, query and write") {
  Config cfg(kSmall);
  Result res;
  REQUIRE(ariel_run(cfg.p, 2, &res.p) == ARIEL_OK);
  CHECK(ariel_result_seed_count(res.p) == 2);
  CHECK(ariel_result_steps(res.p) == 4);

  uint64_t seed = 0;
  double bw = 0;
  CHECK(ariel_result_seed(res.p, 1, &seed, &bw) == ARIEL_OK);
  CHECK(seed == 2);
  double raw = 0;
  CHECK(ariel_calibrate(cfg.p, 2, &raw) == ARIEL_OK);
  CHECK(bw == doctest::Approx(raw * 1.25).epsilon(1e-12));
  CHECK(ariel_result_seed(res.p, 2, &seed, &bw) == ARIEL_E_RANGE);

  double a = 0, b = 0, mean = 0, hw = 0;
  int has = 0;
  CHECK(ariel_result_value(res.p, 0, "success", 1, &a) == ARIEL_OK);
  CHECK(ariel_result_value(res.p, 1, "success", 1, &b) == ARIEL_OK);
  CHECK(ariel_result_mean(res.p, "success", 1, &mean, &hw, &has) == ARIEL_OK);
  CHECK(mean == doctest::Approx((a + b) / 2));
  CHECK(has == 1);
  CHECK(ariel_result_mean(res.p, "success", 5, &mean, &hw, &has) == ARIEL_E_RANGE);
  CHECK(ariel_result_mean(res.p, "succes", 1, &mean, &hw, &has) == ARIEL_E_ARGUMENT);
  CHECK(ariel_result_value(res.p, 0, "success", 0, &a) == ARIEL_E_RANGE);

  fs::path csv = scratch("run.csv");
  CHECK(ariel_result_write_csv(res.p, csv.string().c_str()) == ARIEL_OK);
  CHECK(count_lines(csv) == 1 + 3 * 4 * 10);
  CHECK(ariel_result_write_summary(res.p, scratch("summary.json").string().c_str()) == ARIEL_OK);
  CHECK(ariel_result_write_snapshot(res.p, 0, scratch("store.txt").string().c_str()) == ARIEL_OK);
  CHECK(ariel_result_write_te(res.p, 0, scratch("te.txt").string().c_str()) == ARIEL_OK);
  CHECK(ariel_result_write_te(res.p, 9, scratch("te.txt").string().c_str()) == ARIEL_E_RANGE);
  CHECK(ariel_result_write_csv(res.p, "/nonexistent/dir/x.csv") == ARIEL_E_IO);

  // Same config, same bytes.
  Result again;
  REQUIRE(ariel_run(cfg.p, 1, &again.p) == ARIEL_OK);
  fs::path csv2 = scratch("run2.csv");
  REQUIRE(ariel_result_write_csv(again.p, csv2.string().c_str()) == ARIEL_OK);
  CHECK(slurp(csv) == slurp(csv2));
}

TEST_CASE("single seed has no half-width") {
  Config cfg(kSmall);
  REQUIRE(ariel_config_set(cfg.p, "seeds", "3") == ARIEL_OK);
  Result res;
  REQUIRE(ariel_run(cfg.p, 1, &res.p) == ARIEL_OK);
  double mean = 0, hw = -1;
  int has = 1;
  CHECK(ariel_result_mean(res.p, "delta_s_entity", 4, &mean, &hw, &has) == ARIEL_OK);
  CHECK(has == 0);
}

TEST_CASE("sweep writes every cell and reports failures") {
  std::string text = std::string(kSmall) + "[sweep]\nreuse_ratio = 0, 50\nmapping = random, optimal\n";
  Config cfg(text.c_str());
  fs::path csv = scratch("sweep.csv");
  size_t cells = 0, failed = 9;
  CHECK(ariel_sweep(cfg.p, 4, csv.string().c_str(), &cells, &failed) == ARIEL_OK);
  CHECK(cells == 4);
  CHECK(failed == 0);
  const std::size_t per_run = 3 * 4 * 10;  // (2 seeds + mean) x horizon x metrics
  CHECK(count_lines(csv) == 1 + 4 * per_run);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "reuse_ratio,mapping,kind,seed,step,ariel_t,metric,value,half_width");

  std::string broken = std::string(kSmall) + "[sweep]\ntopology = grid:3, /nonexistent/t.gml\n";
  Config bad(broken.c_str());
  CHECK(ariel_sweep(bad.p, 2, csv.string().c_str(), &cells, &failed) == ARIEL_E_PARTIAL);
  CHECK(cells == 2);
  CHECK(failed == 1);
  CHECK(std::string(ariel_last_error()).find("t.gml") != std::string::npos);
  CHECK(count_lines(csv) == 1 + per_run);
}

TEST_CASE("calibration failure and topology report") {
  Config cfg(kSmall);
  REQUIRE(ariel_config_set(cfg.p, "calibrate_max", "2000") == ARIEL_OK);
  double bw = 0;
  CHECK(ariel_calibrate(cfg.p, 1, &bw) == ARIEL_E_CALIBRATION);
  Result res;
  CHECK(ariel_run(cfg.p, 1, &res.p) == ARIEL_E_CALIBRATION);
  CHECK(res.p == nullptr);

  Config rep(kSmall);
  double r = 0;
  int defined = 1;
  size_t skipped = 0;
  fs::path csv = scratch("topo.csv");
  CHECK(ariel_topo_report(rep.p, 1, csv.string().c_str(), &r, &defined, &skipped) == ARIEL_E_CONFIG);
  REQUIRE(ariel_config_add_topology(rep.p, "grid:3") == ARIEL_OK);
  REQUIRE(ariel_config_add_topology(rep.p, "/nonexistent/zoo.gml") == ARIEL_OK);
  CHECK(ariel_topo_report(rep.p, 1, csv.string().c_str(), &r, &defined, &skipped) == ARIEL_OK);
  CHECK(skipped == 1);
  CHECK(defined == 0);
  CHECK(count_lines(csv) == 4);
}
