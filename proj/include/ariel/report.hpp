#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ariel/config.hpp"
#include "ariel/simulator.hpp"

namespace ariel {

/// CSV columns after any sweep coordinates. `kind` is "run" (one seed) or
/// "mean" (across seeds, with the 95% half-width when there are 2+ seeds).
inline constexpr const char* kCsvColumns = "kind,seed,step,ariel_t,metric,value,half_width";

/// Numbers are written with 17 significant digits, so they read back exactly.
std::string format_number(double x);

void write_csv_header(std::ostream& out, const std::vector<std::string>& coord_keys = {});
void write_csv_rows(std::ostream& out, const ExperimentResult& res,
                    const std::vector<std::pair<std::string, std::string>>& coords = {});

/// Rows write_csv_rows emits for one result: seeds x steps x metrics plus
/// steps x metrics aggregate rows.
std::size_t csv_row_count(const ExperimentResult& res);

void write_summary_json(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& res);

/// Pins, load fractions and per-path flow counts of a finished run.
void write_te_dump(std::ostream& out, const Topology& topo, const RunResult& run);

struct TopoRow {
  std::string source;
  std::string name;
  std::size_t nodes = 0;
  std::size_t links = 0;  // undirected
  double avg_spl = 0.0;
  int diameter = 0;
  double delta_s = 0.0;  // across-seed mean of delta_s_entity at the horizon
  std::string error;     // nonempty: the row was skipped
};

struct TopoReport {
  std::vector<TopoRow> rows;
  std::optional<double> pearson_r;  // AvgSPL vs delta_s over the good rows; absent below 3 or with zero variance
};

/// Runs `cfg` on each topology source (file path or built-in spec).
/// Unloadable or failing topologies become rows with `error` set.
TopoReport topo_report(const std::vector<std::string>& sources, const ExperimentConfig& cfg, std::size_t jobs = 1);

void write_topo_csv(std::ostream& out, const TopoReport& report);

}  // namespace ariel
