/// @file config.hpp
/// @brief Run configuration: parsing, validation and the resolved form with
/// every default filled in.
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cyvortex/fields.hpp"
#include "cyvortex/solver.hpp"

namespace cyv {

struct RunConfig {
  MetricPreset preset = MetricPreset::neck;
  double mass = 1.0;
  double alpha_target = 1.25;
  double alpha_max = 100.0;
  std::filesystem::path table;  // tabulated preset only, resolved against the config directory

  std::vector<Vortex> vortices;

  double T = 12.0;
  std::size_t n_t = 513;
  std::size_t n_theta = 128;

  SolverOptions solver;
  double epsilon_scale = 1.0;
  SourceMode source = SourceMode::lattice;
  int sign = 1;

  bool dump_fields = true;
  std::filesystem::path out_dir = "out";  // resolved against the config directory

  std::string mms_case = "gauss-cos";
  std::vector<std::pair<std::size_t, std::size_t>> mms_grids = {{128, 64}, {256, 128}, {512, 256}};

  DecayOptions decay;

  bool verify_symmetry = true;
  bool verify_truncation = true;
};

/// Throws Error(config) on malformed JSON, unknown keys or invalid values.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration as JSON (sorted keys, all defaults present).
std::string resolved_config_json(const RunConfig& config, int indent = 2);

/// Builds the metric, loading the table for the tabulated preset.
CylinderMetric build_metric(const RunConfig& config);

}  // namespace cyv
