#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ariel/simulator.hpp"

namespace ariel {

/// Sets one ExperimentConfig field from its text form. Throws Error(Config)
/// naming the key when the key is unknown or the value does not parse.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Text form of every settable field, in a fixed order.
std::vector<std::pair<std::string, std::string>> describe(const ExperimentConfig& cfg);

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

/// A config file: the base experiment plus optional sweep axes, a topology
/// list for reports and an output directory.
struct BatchSpec {
  ExperimentConfig base;
  std::vector<SweepAxis> axes;
  std::vector<std::string> topologies;
  std::string out_dir;
};

/// Flat `key = value` lines; `#` and `;` start comments. Keys after a
/// `[sweep]` header are axes with comma-separated values. `topologies` and
/// `out` are batch keys; everything else must be an experiment field.
/// Relative topology paths resolve against `base_dir`.
BatchSpec parse_batch(std::string_view text, const std::filesystem::path& base_dir = {});
BatchSpec load_batch(const std::filesystem::path& file);

struct SweepCell {
  std::vector<std::pair<std::string, std::string>> coords;  // axis key -> value
  ExperimentConfig cfg;
};

/// Cartesian product of the axes, first axis slowest. No axes: one cell.
std::vector<SweepCell> expand_sweep(const BatchSpec& spec);

/// Splits on commas and trims; empty items are dropped.
std::vector<std::string> split_list(std::string_view text);

}  // namespace ariel
