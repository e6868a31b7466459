#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ariel/actors.hpp"
#include "ariel/relation_engine.hpp"
#include "ariel/te_engine.hpp"

namespace ariel {

enum class Mapping { Random, Optimal };
enum class Dissolution { None, Timeout, Strength, TopX };

struct ExperimentConfig {
  /// "grid:N", "mesh:N", "ring:N", "line:N" or a GML/GraphML file.
  std::string topology = "grid:5";
  std::string base_dir;  // relative topology files resolve against this
  Bandwidth capacity = 5e8;
  std::size_t bots = 500;
  std::size_t benign = 500;
  std::size_t max_conns = 5;
  std::optional<Bandwidth> flow_bw;  // unset: calibrate per seed
  double flow_bw_scale = 1.25;  // margin over the calibrated minimum; ignored with explicit flow_bw
  Bandwidth calibrate_min = 1e3;
  Bandwidth calibrate_max = 1e10;
  double reuse_ratio = 0.0;   // percent
  double rehome_ratio = 10.0;  // percent
  Step horizon = 20;
  Mapping mapping = Mapping::Random;
  Dissolution dissolution = Dissolution::None;
  Step timeout = 5;
  double strength_a = 1.0;
  double strength_b = 1.0;
  std::size_t top_x = 50;
  double threshold = 1.0;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t k_paths = 2;
  AttackMode attack_mode = AttackMode::Vertical;
  std::size_t attack_budget = 0;
  bool attacker_any_path = true;  // decoys may ride any deployed path of their pair
  std::size_t pin_targets = 1;  // top *->n nodes handed to the pin planner
  Popularity popularity = Popularity::Uniform;
  double zipf_s = 1.0;
  bool benign_first = true;
  std::size_t max_failed_waves = 3;
  bool prepin_target = false;  // start with shortest-path pins toward the target
  std::string origin;          // node names; empty = most distant pair
  std::string target;
};

/// Throws Error(Config) naming the offending field.
void validate(const ExperimentConfig& cfg);

Topology load_experiment_topology(const ExperimentConfig& cfg);

/// Flooded links (load >= threshold * capacity), the entities that started
/// flows on them at `now`, and the nodes downstream of each on the paths of
/// the flows crossing it.
FloodObservation detect_floods(const Topology& topo, std::span<const Flow> flows, const RouteTable& routes,
                               const RoutingConfig& routing, const std::vector<Bandwidth>& loads, double threshold,
                               Step now);

/// Mean support of the positive class minus mean of the rest; an empty
/// class contributes 0.
double delta_s(const std::vector<std::uint64_t>& positive, const std::vector<std::uint64_t>& negative);

/// Fraction of target links that are flooded.
double attack_success(const AttackPlan& plan, const FloodObservation& obs);

struct StepMetrics {
  Step step = 0;
  Step ariel_t = 0;  // flood events so far
  double delta_entity = 0.0;
  double delta_node = 0.0;
  double delta_pair = 0.0;
  double success = 0.0;
  double participation = 0.0;
  double availability = 0.0;
  std::size_t flooded_links = 0;
  double utilization = 0.0;
  bool saturated = false;
  bool terminated = false;
};

/// Metric names in CSV order.
const std::vector<std::string>& metric_names();
double metric_value(const StepMetrics& m, std::size_t index);

/// One seeded run of the attacker-defender loop.
class Simulation {
 public:
  Simulation(std::shared_ptr<const Topology> topo, const ExperimentConfig& cfg, std::uint64_t seed, Bandwidth flow_bw);

  /// One round. After termination the last metrics row is repeated.
  void step();
  void run();

  /// Benign step and first wave only; true when some target link ends up
  /// flooded and carries an attack flow. Used by calibration.
  bool probe_first_wave();

  /// Rescales every flow to `bw` without touching the routing.
  void set_flow_bandwidth(Bandwidth bw);

  const std::vector<StepMetrics>& metrics() const { return metrics_; }
  const RelationStore& store() const { return store_; }
  const Population& population() const { return pop_; }
  const RoutingConfig& routing() const { return routing_; }
  const RouteTable& routes() const { return routes_; }
  const LoadFractions& fractions() const { return fractions_; }
  const std::vector<Bandwidth>& loads() const { return loads_; }
  const AttackPlan& plan() const { return plan_; }
  const FloodObservation& last_observation() const { return last_obs_; }
  const Topology& topology() const { return *topo_; }
  Bandwidth flow_bandwidth() const { return flow_bw_; }
  bool terminated() const { return terminated_; }

  /// Stage names in execution order of the latest round, for ordering checks.
  const std::vector<std::string>& trace() const { return trace_; }

 private:
  FloodObservation advance_traffic();
  void respond(const FloodObservation& obs);
  void fill_delta_s(StepMetrics& m) const;

  std::shared_ptr<const Topology> topo_;
  ExperimentConfig cfg_;
  std::uint64_t seed_;
  Bandwidth flow_bw_;
  std::shared_ptr<const PathSet> paths_;
  Population pop_;
  RouteTable routes_;
  RoutingConfig routing_;
  LoadFractions fractions_;
  std::vector<Bandwidth> loads_;
  RelationStore store_;
  DestinationModel dest_;
  AttackPlan plan_;
  FloodObservation last_obs_;
  Rng benign_rng_;
  Rng attack_rng_;
  Step round_ = 0;
  Step ariel_t_ = 0;
  std::size_t failed_ = 0;
  bool terminated_ = false;
  std::vector<StepMetrics> metrics_;
  std::vector<std::string> trace_;
};

/// Lowest flow bandwidth in [cfg.calibrate_min, cfg.calibrate_max] whose
/// first wave floods a target link. Throws Error(Calibration) naming the
/// range when none does.
Bandwidth calibrate_flow_bw(std::shared_ptr<const Topology> topo, const ExperimentConfig& cfg, std::uint64_t seed);

struct RunResult {
  std::uint64_t seed = 0;
  Bandwidth flow_bw = 0.0;
  std::vector<StepMetrics> steps;
  RelationStore store;
  RoutingConfig routing;
  RouteTable routes;
  LoadFractions fractions;
};

struct AggregateRow {
  Step step = 0;
  std::string metric;
  double mean = 0.0;
  std::optional<double> half_width;  // absent for a single seed
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::vector<AggregateRow> aggregate;
};

/// Runs every seed (up to `jobs` in parallel) and aggregates per step.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1);
ExperimentResult run_experiment(std::shared_ptr<const Topology> topo, const ExperimentConfig& cfg,
                                std::size_t jobs = 1);

/// 95% Student-t half-width of the mean; absent below two samples.
std::optional<double> t_half_width(const std::vector<double>& samples);

/// Sample Pearson correlation; absent when either side has zero variance.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ariel
