#include "cczsim/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

namespace cczsim {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& path) {
  if (!j.is_object()) {
    throw ConfigError(path + ": expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) {
      throw ConfigError(path + "." + key + ": unknown key");
    }
  }
}

double require_number(const json& j, const std::string& key,
                      const std::string& path) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ConfigError(path + "." + key + ": missing or non-numeric");
  }
  return j.at(key).get<double>();
}

double optional_number(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

ModeSpec parse_mode(const json& j, const std::string& path, int default_levels) {
  reject_unknown_keys(j, {"label", "frequency_ghz", "anharmonicity_ghz", "levels"},
                      path);
  ModeSpec m;
  if (!j.contains("label") || !j.at("label").is_string()) {
    throw ConfigError(path + ".label: missing or non-string");
  }
  m.label = j.at("label").get<std::string>();
  m.frequency_ghz = require_number(j, "frequency_ghz", path);
  m.anharmonicity_ghz = require_number(j, "anharmonicity_ghz", path);
  m.levels = static_cast<int>(optional_number(j, "levels", default_levels));
  return m;
}

}  // namespace

DeviceSpec RunConfig::device(Flavor f) const {
  if (f == Flavor::Effective) {
    return DeviceSpec::effective(qubits, g12_ghz, g23_ghz, g13_ghz);
  }
  if (!full) {
    throw ConfigError("config has no full-model section");
  }
  DeviceSpec spec;
  spec.flavor = Flavor::Full;
  spec.modes = {qubits[0], full->couplers[0], qubits[1], full->couplers[1],
                qubits[2]};
  const std::string q1 = qubits[0].label, q2 = qubits[1].label,
                    q3 = qubits[2].label;
  const std::string c1 = full->couplers[0].label, c2 = full->couplers[1].label;
  spec.set_coupling(q1, c1, full->qubit_coupler_g_ghz);
  spec.set_coupling(q2, c1, full->qubit_coupler_g_ghz);
  spec.set_coupling(q2, c2, full->qubit_coupler_g_ghz);
  spec.set_coupling(q3, c2, full->qubit_coupler_g_ghz);
  spec.set_coupling(q1, q2, full->direct_g12_ghz);
  spec.set_coupling(q2, q3, full->direct_g23_ghz);
  return spec;
}

double RunConfig::dt_for(Flavor f) const {
  return f == Flavor::Effective ? pulses.dt_effective_ns : pulses.dt_full_ns;
}

WorkingPointOptions RunConfig::working_point_options(Flavor f, int jobs) const {
  WorkingPointOptions o;
  o.detuning_points = f == Flavor::Effective ? calibration.detuning_points
                                             : calibration.detuning_points_full;
  o.detuning_span_ghz = calibration.detuning_span_mhz / 1e3;
  o.time_points = calibration.time_points;
  o.time_max_ns = calibration.time_max_ns;
  o.phase_tolerance_rad = calibration.phase_tolerance_rad;
  o.min_p_return = calibration.min_p_return;
  o.ramp_ns = pulses.ramp_ns;
  o.dt_ns = dt_for(f);
  o.refine = calibration.refine;
  o.jobs = jobs;
  return o;
}

CPhaseOptions RunConfig::cphase_options(Flavor f) const {
  CPhaseOptions o;
  o.ramp_ns = pulses.cphase_ramp_ns;
  o.dt_ns = dt_for(f);
  o.phase_tolerance_rad = calibration.cphase_phase_tolerance_rad;
  o.max_duration_ns = calibration.cphase_max_duration_ns;
  return o;
}

CalibrationSettings RunConfig::calibration_settings(Flavor f, int jobs) const {
  CalibrationSettings s;
  s.working_point = working_point_options(f, jobs);
  s.cphase = cphase_options(f);
  s.dt_ns = dt_for(f);
  return s;
}

CCPhaseMapOptions RunConfig::ccphase_map_options(Flavor f, int jobs) const {
  CCPhaseMapOptions o;
  o.delta_min_ghz = calibration.ccphase_delta_min_mhz / 1e3;
  o.delta_max_ghz = calibration.ccphase_delta_max_mhz / 1e3;
  o.points = calibration.ccphase_points;
  o.ramp_ns = pulses.ramp_ns;
  o.dt_ns = dt_for(f);
  o.jobs = jobs;
  return o;
}

RobustnessOptions RunConfig::robustness_options(Flavor f, int jobs) const {
  RobustnessOptions o;
  o.dt_ns = dt_for(f);
  o.jobs = jobs;
  return o;
}

RunConfig parse_config(const nlohmann::json& j) {
  reject_unknown_keys(j, {"device", "pulses", "calibration", "noise", "outputs"},
                      "config");
  if (!j.contains("device")) throw ConfigError("config.device: missing");

  RunConfig cfg;
  const json& dev = j.at("device");
  reject_unknown_keys(dev, {"flavor", "qubits", "effective", "full"},
                      "config.device");

  if (dev.contains("flavor")) {
    const std::string f = dev.at("flavor").get<std::string>();
    if (f == "effective") {
      cfg.flavor = Flavor::Effective;
    } else if (f == "full") {
      cfg.flavor = Flavor::Full;
    } else {
      throw ConfigError("config.device.flavor: must be 'effective' or 'full'");
    }
  }

  if (!dev.contains("qubits") || !dev.at("qubits").is_array() ||
      dev.at("qubits").size() != 3) {
    throw ConfigError("config.device.qubits: exactly three qubits required");
  }
  for (size_t i = 0; i < 3; ++i) {
    cfg.qubits.push_back(parse_mode(dev.at("qubits").at(i),
                                    "config.device.qubits[" + std::to_string(i) +
                                        "]",
                                    3));
  }

  if (!dev.contains("effective")) {
    throw ConfigError("config.device.effective: missing");
  }
  const json& eff = dev.at("effective");
  reject_unknown_keys(eff, {"g12_ghz", "g23_ghz", "g13_ghz"},
                      "config.device.effective");
  cfg.g12_ghz = require_number(eff, "g12_ghz", "config.device.effective");
  cfg.g23_ghz = require_number(eff, "g23_ghz", "config.device.effective");
  cfg.g13_ghz = optional_number(eff, "g13_ghz", 0.0);

  if (dev.contains("full")) {
    const json& full = dev.at("full");
    reject_unknown_keys(full,
                        {"couplers", "qubit_coupler_g_ghz", "direct_g12_ghz",
                         "direct_g23_ghz"},
                        "config.device.full");
    FullModelConfig fm;
    if (!full.contains("couplers") || !full.at("couplers").is_array() ||
        full.at("couplers").size() != 2) {
      throw ConfigError("config.device.full.couplers: exactly two couplers");
    }
    for (size_t i = 0; i < 2; ++i) {
      fm.couplers.push_back(
          parse_mode(full.at("couplers").at(i),
                     "config.device.full.couplers[" + std::to_string(i) + "]",
                     2));
    }
    fm.qubit_coupler_g_ghz =
        require_number(full, "qubit_coupler_g_ghz", "config.device.full");
    fm.direct_g12_ghz = require_number(full, "direct_g12_ghz", "config.device.full");
    fm.direct_g23_ghz = require_number(full, "direct_g23_ghz", "config.device.full");
    cfg.full = std::move(fm);
  }
  if (cfg.flavor == Flavor::Full && !cfg.full) {
    throw ConfigError("config.device: flavor 'full' needs a full section");
  }

  if (j.contains("pulses")) {
    const json& p = j.at("pulses");
    reject_unknown_keys(
        p, {"ramp_ns", "dt_effective_ns", "dt_full_ns", "cphase_ramp_ns"},
        "config.pulses");
    cfg.pulses.ramp_ns = optional_number(p, "ramp_ns", cfg.pulses.ramp_ns);
    cfg.pulses.dt_effective_ns =
        optional_number(p, "dt_effective_ns", cfg.pulses.dt_effective_ns);
    cfg.pulses.dt_full_ns = optional_number(p, "dt_full_ns", cfg.pulses.dt_full_ns);
    cfg.pulses.cphase_ramp_ns =
        optional_number(p, "cphase_ramp_ns", cfg.pulses.cphase_ramp_ns);
  }

  if (j.contains("calibration")) {
    const json& c = j.at("calibration");
    reject_unknown_keys(
        c,
        {"detuning_points", "detuning_span_mhz", "detuning_points_full",
         "time_points", "time_max_ns", "phase_tolerance_rad", "min_p_return",
         "refine", "cphase_max_duration_ns", "cphase_phase_tolerance_rad",
         "ccphase_delta_min_mhz", "ccphase_delta_max_mhz", "ccphase_points"},
        "config.calibration");
    auto& cc = cfg.calibration;
    cc.detuning_points =
        static_cast<int>(optional_number(c, "detuning_points", cc.detuning_points));
    cc.detuning_span_mhz =
        optional_number(c, "detuning_span_mhz", cc.detuning_span_mhz);
    cc.detuning_points_full = static_cast<int>(
        optional_number(c, "detuning_points_full", cc.detuning_points_full));
    cc.time_points =
        static_cast<int>(optional_number(c, "time_points", cc.time_points));
    cc.time_max_ns = optional_number(c, "time_max_ns", cc.time_max_ns);
    cc.phase_tolerance_rad =
        optional_number(c, "phase_tolerance_rad", cc.phase_tolerance_rad);
    cc.min_p_return = optional_number(c, "min_p_return", cc.min_p_return);
    if (c.contains("refine")) cc.refine = c.at("refine").get<bool>();
    cc.cphase_max_duration_ns =
        optional_number(c, "cphase_max_duration_ns", cc.cphase_max_duration_ns);
    cc.cphase_phase_tolerance_rad = optional_number(
        c, "cphase_phase_tolerance_rad", cc.cphase_phase_tolerance_rad);
    cc.ccphase_delta_min_mhz =
        optional_number(c, "ccphase_delta_min_mhz", cc.ccphase_delta_min_mhz);
    cc.ccphase_delta_max_mhz =
        optional_number(c, "ccphase_delta_max_mhz", cc.ccphase_delta_max_mhz);
    cc.ccphase_points =
        static_cast<int>(optional_number(c, "ccphase_points", cc.ccphase_points));
  }

  if (j.contains("noise") && !j.at("noise").is_null()) {
    const json& n = j.at("noise");
    if (!n.is_object()) throw ConfigError("config.noise: expected an object");
    NoiseSpec noise;
    std::set<std::string> qubit_labels;
    for (const auto& q : cfg.qubits) qubit_labels.insert(q.label);
    for (const auto& [label, entry] : n.items()) {
      if (!qubit_labels.count(label)) {
        throw ConfigError("config.noise." + label + ": unknown qubit");
      }
      reject_unknown_keys(entry, {"t1_ns", "tphi_ns"}, "config.noise." + label);
      NoiseSpec::ModeNoise mn;
      if (entry.contains("t1_ns")) mn.t1_ns = entry.at("t1_ns").get<double>();
      if (entry.contains("tphi_ns")) mn.tphi_ns = entry.at("tphi_ns").get<double>();
      noise.per_qubit[label] = mn;
    }
    noise.validate();
    cfg.noise = std::move(noise);
  }

  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    reject_unknown_keys(o, {"directory"}, "config.outputs");
    if (o.contains("directory")) {
      cfg.outputs.directory = o.at("directory").get<std::string>();
    }
  }

  // Fatal device invariants fail the parse; warnings are reported by the
  // validate command.
  const DeviceSpec spec = cfg.device(Flavor::Effective);
  for (const auto& issue : spec.validate()) {
    if (issue.fatal) throw ConfigError("config.device: " + issue.message);
  }
  if (cfg.full) {
    for (const auto& issue : cfg.device(Flavor::Full).validate()) {
      if (issue.fatal) throw ConfigError("config.device.full: " + issue.message);
    }
  }

  cfg.hash = config_hash_hex(j);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return parse_config(j);
}

std::string config_hash_hex(const nlohmann::json& j) {
  const std::string canonical = j.dump();  // object keys are sorted
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace cczsim
