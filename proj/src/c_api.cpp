#include "ariel/ariel.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "ariel/config.hpp"
#include "ariel/report.hpp"

struct ariel_config {
  ariel::BatchSpec spec;
};

struct ariel_result {
  ariel::ExperimentConfig cfg;
  std::shared_ptr<const ariel::Topology> topo;
  ariel::ExperimentResult res;
};

namespace {

thread_local std::string last_error;

ariel_status code_of(ariel::ErrorCode c) {
  switch (c) {
    case ariel::ErrorCode::Argument: return ARIEL_E_ARGUMENT;
    case ariel::ErrorCode::Parse: return ARIEL_E_PARSE;
    case ariel::ErrorCode::Structure: return ARIEL_E_STRUCTURE;
    case ariel::ErrorCode::Config: return ARIEL_E_CONFIG;
    case ariel::ErrorCode::Infeasible: return ARIEL_E_INFEASIBLE;
    case ariel::ErrorCode::Calibration: return ARIEL_E_CALIBRATION;
    case ariel::ErrorCode::Io: return ARIEL_E_IO;
    case ariel::ErrorCode::Format: return ARIEL_E_FORMAT;
    case ariel::ErrorCode::Ordering: return ARIEL_E_ORDERING;
    case ariel::ErrorCode::Consistency: return ARIEL_E_CONSISTENCY;
  }
  return ARIEL_E_INTERNAL;
}

ariel_status fail(ariel_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

template <class F>
ariel_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const ariel::Error& e) {
    return fail(code_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ARIEL_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ARIEL_E_INTERNAL, e.what());
  } catch (...) {
    return fail(ARIEL_E_INTERNAL, "unknown error");
  }
}

std::ofstream open_out(const char* path) {
  if (!path || !*path) throw ariel::Error(ariel::ErrorCode::Argument, "empty output path");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ariel::Error(ariel::ErrorCode::Io, std::string("cannot write '") + path + "'");
  return out;
}

void close_out(std::ofstream& out, const char* path) {
  out.close();
  if (!out) throw ariel::Error(ariel::ErrorCode::Io, std::string("write failed for '") + path + "'");
}

std::size_t clamp_jobs(unsigned jobs) { return jobs == 0 ? 1 : jobs; }

const ariel::RunResult* run_at(const ariel_result* r, size_t run) {
  return run < r->res.runs.size() ? &r->res.runs[run] : nullptr;
}

int metric_index(const char* metric) {
  const auto& names = ariel::metric_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == metric) return static_cast<int>(i);
  return -1;
}

}  // namespace

extern "C" {

const char* ariel_version(void) { return "1.0.0"; }

const char* ariel_last_error(void) { return last_error.c_str(); }

const char* ariel_status_name(ariel_status s) {
  switch (s) {
    case ARIEL_OK: return "ok";
    case ARIEL_E_ARGUMENT: return "argument";
    case ARIEL_E_PARSE: return "parse";
    case ARIEL_E_STRUCTURE: return "structure";
    case ARIEL_E_CONFIG: return "config";
    case ARIEL_E_INFEASIBLE: return "infeasible";
    case ARIEL_E_CALIBRATION: return "calibration";
    case ARIEL_E_IO: return "io";
    case ARIEL_E_FORMAT: return "format";
    case ARIEL_E_ORDERING: return "ordering";
    case ARIEL_E_CONSISTENCY: return "consistency";
    case ARIEL_E_RANGE: return "range";
    case ARIEL_E_PARTIAL: return "partial";
    case ARIEL_E_INTERNAL: return "internal";
  }
  return "unknown";
}

ariel_status ariel_config_new(ariel_config** out) {
  if (!out) return fail(ARIEL_E_ARGUMENT, "null output handle");
  return guarded([&] {
    *out = new ariel_config{};
    return ARIEL_OK;
  });
}

ariel_status ariel_config_load(const char* path, ariel_config** out) {
  if (!out || !path) return fail(ARIEL_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<ariel_config>();
    c->spec = ariel::load_batch(path);
    *out = c.release();
    return ARIEL_OK;
  });
}

ariel_status ariel_config_parse(const char* text, const char* base_dir, ariel_config** out) {
  if (!out || !text) return fail(ARIEL_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<ariel_config>();
    c->spec = ariel::parse_batch(text, base_dir ? base_dir : "");
    *out = c.release();
    return ARIEL_OK;
  });
}

void ariel_config_free(ariel_config* cfg) { delete cfg; }

ariel_status ariel_config_set(ariel_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(ARIEL_E_ARGUMENT, "null argument");
  return guarded([&] {
    if (std::strcmp(key, "out") == 0) {
      cfg->spec.out_dir = value;
      return ARIEL_OK;
    }
    ariel::apply_setting(cfg->spec.base, key, value);
    return ARIEL_OK;
  });
}

ariel_status ariel_config_get(const ariel_config* cfg, const char* key, char* buf, size_t len, size_t* needed) {
  if (!cfg || !key) return fail(ARIEL_E_ARGUMENT, "null argument");
  return guarded([&] {
    for (const auto& [k, v] : ariel::describe(cfg->spec.base)) {
      if (k != key) continue;
      if (needed) *needed = v.size() + 1;
      if (buf && len > 0) {
        std::size_t n = std::min(len - 1, v.size());
        std::memcpy(buf, v.data(), n);
        buf[n] = '\0';
      }
      return ARIEL_OK;
    }
    return fail(ARIEL_E_CONFIG, std::string("config key '") + key + "': unknown key");
  });
}

const char* ariel_config_out_dir(const ariel_config* cfg) { return cfg ? cfg->spec.out_dir.c_str() : ""; }

size_t ariel_config_sweep_cells(const ariel_config* cfg) {
  if (!cfg) return 0;
  size_t n = 1;
  for (const auto& a : cfg->spec.axes) n *= a.values.size();
  return n;
}

size_t ariel_config_topology_count(const ariel_config* cfg) { return cfg ? cfg->spec.topologies.size() : 0; }

ariel_status ariel_config_add_topology(ariel_config* cfg, const char* source) {
  if (!cfg || !source || !*source) return fail(ARIEL_E_ARGUMENT, "null or empty topology");
  return guarded([&] {
    cfg->spec.topologies.emplace_back(source);
    return ARIEL_OK;
  });
}

ariel_status ariel_run(const ariel_config* cfg, unsigned jobs, ariel_result** out) {
  if (!cfg || !out) return fail(ARIEL_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto r = std::make_unique<ariel_result>();
    r->cfg = cfg->spec.base;
    ariel::validate(r->cfg);
    r->topo = std::make_shared<const ariel::Topology>(ariel::load_experiment_topology(r->cfg));
    r->res = ariel::run_experiment(r->topo, r->cfg, clamp_jobs(jobs));
    *out = r.release();
    return ARIEL_OK;
  });
}

void ariel_result_free(ariel_result* res) { delete res; }

size_t ariel_result_seed_count(const ariel_result* res) { return res ? res->res.runs.size() : 0; }

ariel_status ariel_result_seed(const ariel_result* res, size_t run, uint64_t* seed, double* flow_bw) {
  if (!res) return fail(ARIEL_E_ARGUMENT, "null result");
  const ariel::RunResult* r = run_at(res, run);
  if (!r) return fail(ARIEL_E_RANGE, "run index " + std::to_string(run) + " out of range");
  if (seed) *seed = r->seed;
  if (flow_bw) *flow_bw = r->flow_bw;
  return ARIEL_OK;
}

size_t ariel_result_steps(const ariel_result* res) {
  if (!res || res->res.runs.empty()) return 0;
  return res->res.runs.front().steps.size();
}

ariel_status ariel_result_mean(const ariel_result* res, const char* metric, int64_t step, double* mean,
                               double* half_width, int* has_half_width) {
  if (!res || !metric) return fail(ARIEL_E_ARGUMENT, "null argument");
  if (metric_index(metric) < 0) return fail(ARIEL_E_ARGUMENT, std::string("unknown metric '") + metric + "'");
  for (const auto& a : res->res.aggregate) {
    if (a.step != step || a.metric != metric) continue;
    if (mean) *mean = a.mean;
    if (has_half_width) *has_half_width = a.half_width ? 1 : 0;
    if (half_width) *half_width = a.half_width ? *a.half_width : 0.0;
    return ARIEL_OK;
  }
  return fail(ARIEL_E_RANGE, "step " + std::to_string(step) + " out of range");
}

ariel_status ariel_result_value(const ariel_result* res, size_t run, const char* metric, int64_t step,
                                double* value) {
  if (!res || !metric) return fail(ARIEL_E_ARGUMENT, "null argument");
  int m = metric_index(metric);
  if (m < 0) return fail(ARIEL_E_ARGUMENT, std::string("unknown metric '") + metric + "'");
  const ariel::RunResult* r = run_at(res, run);
  if (!r) return fail(ARIEL_E_RANGE, "run index " + std::to_string(run) + " out of range");
  if (step < 1 || static_cast<size_t>(step) > r->steps.size())
    return fail(ARIEL_E_RANGE, "step " + std::to_string(step) + " out of range");
  if (value) *value = ariel::metric_value(r->steps[static_cast<size_t>(step - 1)], static_cast<std::size_t>(m));
  return ARIEL_OK;
}

ariel_status ariel_result_write_csv(const ariel_result* res, const char* path) {
  if (!res) return fail(ARIEL_E_ARGUMENT, "null result");
  return guarded([&] {
    auto out = open_out(path);
    ariel::write_csv_header(out);
    ariel::write_csv_rows(out, res->res);
    close_out(out, path);
    return ARIEL_OK;
  });
}

ariel_status ariel_result_write_summary(const ariel_result* res, const char* path) {
  if (!res) return fail(ARIEL_E_ARGUMENT, "null result");
  return guarded([&] {
    auto out = open_out(path);
    ariel::write_summary_json(out, res->cfg, res->res);
    close_out(out, path);
    return ARIEL_OK;
  });
}

ariel_status ariel_result_write_snapshot(const ariel_result* res, size_t run, const char* path) {
  if (!res) return fail(ARIEL_E_ARGUMENT, "null result");
  const ariel::RunResult* r = run_at(res, run);
  if (!r) return fail(ARIEL_E_RANGE, "run index " + std::to_string(run) + " out of range");
  return guarded([&] {
    auto out = open_out(path);
    r->store.snapshot(out);
    close_out(out, path);
    return ARIEL_OK;
  });
}

ariel_status ariel_result_write_te(const ariel_result* res, size_t run, const char* path) {
  if (!res) return fail(ARIEL_E_ARGUMENT, "null result");
  const ariel::RunResult* r = run_at(res, run);
  if (!r) return fail(ARIEL_E_RANGE, "run index " + std::to_string(run) + " out of range");
  return guarded([&] {
    auto out = open_out(path);
    ariel::write_te_dump(out, *res->topo, *r);
    close_out(out, path);
    return ARIEL_OK;
  });
}

ariel_status ariel_calibrate(const ariel_config* cfg, uint64_t seed, double* flow_bw) {
  if (!cfg || !flow_bw) return fail(ARIEL_E_ARGUMENT, "null argument");
  return guarded([&] {
    ariel::validate(cfg->spec.base);
    auto topo = std::make_shared<const ariel::Topology>(ariel::load_experiment_topology(cfg->spec.base));
    *flow_bw = ariel::calibrate_flow_bw(topo, cfg->spec.base, seed);
    return ARIEL_OK;
  });
}

ariel_status ariel_sweep(const ariel_config* cfg, unsigned jobs, const char* csv_path, size_t* cells,
                         size_t* failed_cells) {
  if (!cfg) return fail(ARIEL_E_ARGUMENT, "null config");
  return guarded([&] {
    std::vector<ariel::SweepCell> grid = ariel::expand_sweep(cfg->spec);
    std::vector<ariel::ExperimentResult> results(grid.size());
    std::vector<std::string> errors(grid.size());

    // Cells run in parallel; each run inside a cell stays sequential.
    std::size_t workers = std::min(clamp_jobs(jobs), grid.size());
    std::size_t next = 0;
    std::mutex mu;
    auto worker = [&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard lock(mu);
          if (next >= grid.size()) return;
          i = next++;
        }
        try {
          results[i] = ariel::run_experiment(grid[i].cfg, 1);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    auto out = open_out(csv_path);
    std::vector<std::string> keys;
    for (const auto& a : cfg->spec.axes) keys.push_back(a.key);
    ariel::write_csv_header(out, keys);
    std::size_t failed = 0;
    std::string first;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!errors[i].empty()) {
        ++failed;
        std::string where;
        for (const auto& [k, v] : grid[i].coords) where += (where.empty() ? "" : " ") + k + "=" + v;
        if (first.empty()) first = "cell [" + where + "]: " + errors[i];
        continue;
      }
      ariel::write_csv_rows(out, results[i], grid[i].coords);
    }
    close_out(out, csv_path);
    if (cells) *cells = grid.size();
    if (failed_cells) *failed_cells = failed;
    if (failed) return fail(ARIEL_E_PARTIAL, std::to_string(failed) + " of " + std::to_string(grid.size()) +
                                                 " cells failed; first " + first);
    return ARIEL_OK;
  });
}

ariel_status ariel_topo_report(const ariel_config* cfg, unsigned jobs, const char* csv_path, double* r,
                               int* r_defined, size_t* skipped) {
  if (!cfg) return fail(ARIEL_E_ARGUMENT, "null config");
  return guarded([&] {
    if (cfg->spec.topologies.empty()) return fail(ARIEL_E_CONFIG, "config key 'topologies': no topologies listed");
    ariel::TopoReport rep = ariel::topo_report(cfg->spec.topologies, cfg->spec.base, clamp_jobs(jobs));
    auto out = open_out(csv_path);
    ariel::write_topo_csv(out, rep);
    close_out(out, csv_path);
    std::size_t bad = 0;
    for (const auto& row : rep.rows) bad += row.error.empty() ? 0 : 1;
    if (skipped) *skipped = bad;
    if (r_defined) *r_defined = rep.pearson_r ? 1 : 0;
    if (r) *r = rep.pearson_r ? *rep.pearson_r : 0.0;
    return ARIEL_OK;
  });
}

}  // extern "C"
