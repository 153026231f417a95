#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "cczsim/config.hpp"

namespace cczsim {

// 17-significant-digit decimal rendering; bit-exact across platforms for
// the deterministic pipeline.
std::string format_double(double v);

struct FileMeta {
  std::string config_hash;
  std::string version = version_string();
};

// Grid CSV: comment header with meta, then an x header row and one row per
// y value (y value in the leading column).
void write_grid_csv(const std::string& path, const ScanGrid& grid,
                    const FileMeta& meta);
// Long-format CSV: named columns, one record per row.
void write_long_csv(const std::string& path,
                    const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows,
                    const FileMeta& meta);
// JSON with the meta block injected at the top level.
void write_json(const std::string& path, nlohmann::json payload,
                const FileMeta& meta);
nlohmann::json read_json(const std::string& path);

nlohmann::json to_json(const CalibrationPoint& p);
CalibrationPoint calibration_point_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PhaseSet& p);
PhaseSet phase_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CPhasePulse& p);
CPhasePulse cphase_pulse_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GateRecipe& r);
GateRecipe gate_recipe_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LeakageReport& l);
nlohmann::json to_json(const GateReport& r);
nlohmann::json to_json(const ZZCoefficients& z);
nlohmann::json to_json(const RobustnessGrid& g);

// Complex matrix as row-major [re, im] pairs.
nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j);

}  // namespace cczsim
