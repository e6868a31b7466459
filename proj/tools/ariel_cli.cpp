// ariel: experiment runner on top of the C interface.
//
//   ariel run --config exp.conf [--seed N]... [--jobs J] [--out DIR] [--mapping optimal|random] [--dump-te]
//   ariel sweep --config exp.conf ...
//   ariel topo-report --config exp.conf [topology files...]
//   ariel calibrate --config exp.conf [--seed N]...
//
// Exit status: 0 ok, 1 runtime failure, 2 usage or config error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ariel/ariel.h"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

struct ConfigDeleter {
  void operator()(ariel_config* c) const { ariel_config_free(c); }
};
struct ResultDeleter {
  void operator()(ariel_result* r) const { ariel_result_free(r); }
};
using ConfigPtr = std::unique_ptr<ariel_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<ariel_result, ResultDeleter>;

struct Options {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> sets;
  unsigned jobs = 1;
  std::string out;
  std::string mapping;
  bool dump_te = false;
  std::vector<std::string> topologies;
};

int report(ariel_status s, const char* what) {
  std::fprintf(stderr, "ariel: %s: %s (%s)\n", what, ariel_last_error(), ariel_status_name(s));
  return s == ARIEL_E_CONFIG ? kUsage : kRuntime;
}

// Loads the config and applies command-line overrides; config trouble is a usage error.
ConfigPtr load_config(const Options& o, int& rc) {
  ariel_config* raw = nullptr;
  ariel_status s = o.config.empty() ? ariel_config_new(&raw) : ariel_config_load(o.config.c_str(), &raw);
  ConfigPtr cfg(raw);
  if (s != ARIEL_OK) {
    std::fprintf(stderr, "ariel: config: %s\n", ariel_last_error());
    rc = kUsage;
    return nullptr;
  }
  auto set = [&](const std::string& key, const std::string& value) {
    if (ariel_config_set(cfg.get(), key.c_str(), value.c_str()) == ARIEL_OK) return true;
    std::fprintf(stderr, "ariel: config: %s\n", ariel_last_error());
    rc = kUsage;
    return false;
  };
  for (const std::string& kv : o.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "ariel: --set expects key=value, got '%s'\n", kv.c_str());
      rc = kUsage;
      return nullptr;
    }
    if (!set(kv.substr(0, eq), kv.substr(eq + 1))) return nullptr;
  }
  if (!o.mapping.empty() && !set("mapping", o.mapping)) return nullptr;
  if (!o.seeds.empty()) {
    std::set<std::uint64_t> seen;
    std::string list;
    for (std::uint64_t s : o.seeds) {
      if (!seen.insert(s).second) {
        std::fprintf(stderr, "ariel: warning: duplicate --seed %llu ignored\n", static_cast<unsigned long long>(s));
        continue;
      }
      list += (list.empty() ? "" : ",") + std::to_string(s);
    }
    if (!set("seeds", list)) return nullptr;
  }
  for (const std::string& t : o.topologies)
    if (ariel_config_add_topology(cfg.get(), t.c_str()) != ARIEL_OK) {
      std::fprintf(stderr, "ariel: %s\n", ariel_last_error());
      rc = kUsage;
      return nullptr;
    }
  rc = kOk;
  return cfg;
}

// --out, then the config's `out`, then $ARIEL_OUT_DIR, then ./ariel_out.
bool output_dir(const Options& o, const ariel_config* cfg, fs::path& dir) {
  if (!o.out.empty())
    dir = o.out;
  else if (*ariel_config_out_dir(cfg))
    dir = ariel_config_out_dir(cfg);
  else if (const char* env = std::getenv("ARIEL_OUT_DIR"); env && *env)
    dir = env;
  else
    dir = "ariel_out";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "ariel: cannot create output directory '%s': %s\n", dir.string().c_str(),
                 ec.message().c_str());
    return false;
  }
  return true;
}

int cmd_run(const Options& o) {
  int rc = kOk;
  ConfigPtr cfg = load_config(o, rc);
  if (!cfg) return rc;
  fs::path dir;
  if (!output_dir(o, cfg.get(), dir)) return kRuntime;

  ariel_result* raw = nullptr;
  if (ariel_status s = ariel_run(cfg.get(), o.jobs, &raw); s != ARIEL_OK) return report(s, "run");
  ResultPtr res(raw);

  if (ariel_status s = ariel_result_write_csv(res.get(), (dir / "metrics.csv").string().c_str()); s != ARIEL_OK)
    return report(s, "write");
  if (ariel_status s = ariel_result_write_summary(res.get(), (dir / "summary.json").string().c_str()); s != ARIEL_OK)
    return report(s, "write");
  for (size_t i = 0; i < ariel_result_seed_count(res.get()); ++i) {
    std::uint64_t seed = 0;
    double bw = 0;
    ariel_result_seed(res.get(), i, &seed, &bw);
    std::string tag = "seed" + std::to_string(seed);
    if (ariel_status s = ariel_result_write_snapshot(res.get(), i, (dir / ("store_" + tag + ".txt")).string().c_str());
        s != ARIEL_OK)
      return report(s, "write");
    if (o.dump_te)
      if (ariel_status s = ariel_result_write_te(res.get(), i, (dir / ("te_" + tag + ".txt")).string().c_str());
          s != ARIEL_OK)
        return report(s, "write");
  }

  const auto steps = static_cast<std::int64_t>(ariel_result_steps(res.get()));
  double mean = 0, hw = 0;
  int has_hw = 0;
  if (steps > 0 && ariel_result_mean(res.get(), "delta_s_entity", steps, &mean, &hw, &has_hw) == ARIEL_OK) {
    double succ = 0;
    ariel_result_mean(res.get(), "success", steps, &succ, nullptr, nullptr);
    std::printf("seeds %zu steps %lld delta_s_entity %.6g%s success %.3g -> %s\n", ariel_result_seed_count(res.get()),
                static_cast<long long>(steps), mean, has_hw ? (" +/- " + std::to_string(hw)).c_str() : "", succ,
                dir.string().c_str());
  }
  return kOk;
}

int cmd_sweep(const Options& o) {
  int rc = kOk;
  ConfigPtr cfg = load_config(o, rc);
  if (!cfg) return rc;
  fs::path dir;
  if (!output_dir(o, cfg.get(), dir)) return kRuntime;
  size_t cells = 0, failed = 0;
  fs::path csv = dir / "sweep.csv";
  ariel_status s = ariel_sweep(cfg.get(), o.jobs, csv.string().c_str(), &cells, &failed);
  if (s == ARIEL_E_PARTIAL) {
    std::fprintf(stderr, "ariel: sweep: %s\n", ariel_last_error());
    std::printf("cells %zu failed %zu -> %s\n", cells, failed, csv.string().c_str());
    return kRuntime;
  }
  if (s != ARIEL_OK) return report(s, "sweep");
  std::printf("cells %zu failed 0 -> %s\n", cells, csv.string().c_str());
  return kOk;
}

int cmd_topo_report(const Options& o) {
  int rc = kOk;
  ConfigPtr cfg = load_config(o, rc);
  if (!cfg) return rc;
  fs::path dir;
  if (!output_dir(o, cfg.get(), dir)) return kRuntime;
  fs::path csv = dir / "topo_report.csv";
  double r = 0;
  int defined = 0;
  size_t skipped = 0;
  if (ariel_status s = ariel_topo_report(cfg.get(), o.jobs, csv.string().c_str(), &r, &defined, &skipped);
      s != ARIEL_OK)
    return report(s, "topo-report");
  if (skipped) std::fprintf(stderr, "ariel: warning: %zu topologies skipped, see the error column\n", skipped);
  if (defined)
    std::printf("pearson r(avg_spl, delta_s) = %.6g -> %s\n", r, csv.string().c_str());
  else
    std::printf("pearson r(avg_spl, delta_s) undefined -> %s\n", csv.string().c_str());
  return kOk;
}

int cmd_calibrate(const Options& o) {
  int rc = kOk;
  ConfigPtr cfg = load_config(o, rc);
  if (!cfg) return rc;
  char buf[4096];
  size_t need = 0;
  ariel_config_get(cfg.get(), "seeds", buf, sizeof buf, &need);
  std::vector<std::uint64_t> seeds;
  for (const char* p = buf; *p;) {
    char* end = nullptr;
    seeds.push_back(std::strtoull(p, &end, 10));
    p = *end == ',' ? end + 1 : end;
  }
  std::printf("seed,flow_bw\n");
  for (std::uint64_t seed : seeds) {
    double bw = 0;
    if (ariel_status s = ariel_calibrate(cfg.get(), seed, &bw); s != ARIEL_OK) return report(s, "calibrate");
    std::printf("%llu,%.17g\n", static_cast<unsigned long long>(seed), bw);
  }
  return kOk;
}

void common(CLI::App* sub, Options& o, bool with_outputs) {
  sub->add_option("--config,-c", o.config, "experiment config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seeds, "seed (repeatable; replaces the config's list)");
  sub->add_option("--set", o.sets, "override a config key, key=value (repeatable)");
  sub->add_option("--mapping", o.mapping, "flow mapping")->check(CLI::IsMember({"optimal", "random"}));
  if (!with_outputs) return;
  sub->add_option("--jobs,-j", o.jobs, "parallel runs")->check(CLI::Range(1u, 256u));
  sub->add_option("--out,-o", o.out, "output directory (default $ARIEL_OUT_DIR or ./ariel_out)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARIEL link-flooding detection simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ariel_version());

  Options o;
  CLI::App* run = app.add_subcommand("run", "run one experiment over its seeds");
  common(run, o, true);
  run->add_flag("--dump-te", o.dump_te, "write the final TE state per seed");

  CLI::App* sweep = app.add_subcommand("sweep", "run the Cartesian product of the [sweep] axes");
  common(sweep, o, true);

  CLI::App* topo = app.add_subcommand("topo-report", "AvgSPL vs delta_s over a list of topologies");
  common(topo, o, true);
  topo->add_option("topologies", o.topologies, "topology files (added to the config's list)");

  CLI::App* calib = app.add_subcommand("calibrate", "print the calibrated flow bandwidth per seed");
  common(calib, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (run->parsed()) return cmd_run(o);
  if (sweep->parsed()) return cmd_sweep(o);
  if (topo->parsed()) return cmd_topo_report(o);
  return cmd_calibrate(o);
}
