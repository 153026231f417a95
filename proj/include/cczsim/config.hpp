#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>

#include "cczsim/gates.hpp"

namespace cczsim {

struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};

struct FullModelConfig {
  std::vector<ModeSpec> couplers;  // c1, c2
  double qubit_coupler_g_ghz = 0.0;
  double direct_g12_ghz = 0.0;
  double direct_g23_ghz = 0.0;
};

struct PulseDefaults {
  double ramp_ns = 5.0;
  double dt_effective_ns = 0.01;
  double dt_full_ns = 0.005;
  double cphase_ramp_ns = 1.0;
};

struct CalibrationConfig {
  int detuning_points = 61;
  double detuning_span_mhz = 30.0;
  int detuning_points_full = 21;  // reduced grid for the larger model
  int time_points = 120;
  double time_max_ns = 250.0;
  double phase_tolerance_rad = 0.05;
  double min_p_return = 0.95;
  bool refine = true;
  double cphase_max_duration_ns = 60.0;
  double cphase_phase_tolerance_rad = 0.02;
  double ccphase_delta_min_mhz = -18.0;
  double ccphase_delta_max_mhz = 22.0;
  int ccphase_points = 41;
};

struct OutputConfig {
  std::string directory = "out";
};

// Validated run configuration; GHz and ns at this boundary.
struct RunConfig {
  std::vector<ModeSpec> qubits;
  double g12_ghz = 0.0, g23_ghz = 0.0, g13_ghz = 0.0;
  std::optional<FullModelConfig> full;
  Flavor flavor = Flavor::Effective;
  PulseDefaults pulses;
  CalibrationConfig calibration;
  std::optional<NoiseSpec> noise;
  OutputConfig outputs;
  std::string hash;  // canonical-content hash, embedded in every output

  DeviceSpec device(Flavor f) const;  // throws when full params are absent
  double dt_for(Flavor f) const;
  WorkingPointOptions working_point_options(Flavor f, int jobs) const;
  CPhaseOptions cphase_options(Flavor f) const;
  CalibrationSettings calibration_settings(Flavor f, int jobs) const;
  CCPhaseMapOptions ccphase_map_options(Flavor f, int jobs) const;
  RobustnessOptions robustness_options(Flavor f, int jobs) const;
};

// Strict parse: unknown keys are rejected with their JSON paths.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// FNV-1a over the canonical (sorted-key) serialization.
std::string config_hash_hex(const nlohmann::json& j);

}  // namespace cczsim
