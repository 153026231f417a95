#include "cczsim/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace cczsim {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

namespace {

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path());
  }
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void write_meta_comment(std::ofstream& out, const FileMeta& meta) {
  out << "# cczsim " << meta.version << " config=" << meta.config_hash << "\n";
}

}  // namespace

void write_grid_csv(const std::string& path, const ScanGrid& grid,
                    const FileMeta& meta) {
  std::ofstream out = open_output(path);
  write_meta_comment(out, meta);
  out << grid.y_name << "\\" << grid.x_name;
  for (const double x : grid.x) out << "," << format_double(x);
  out << "\n";
  for (Eigen::Index r = 0; r < grid.values.rows(); ++r) {
    out << format_double(grid.y[r]);
    for (Eigen::Index c = 0; c < grid.values.cols(); ++c) {
      out << "," << format_double(grid.values(r, c));
    }
    out << "\n";
  }
}

void write_long_csv(const std::string& path,
                    const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows,
                    const FileMeta& meta) {
  std::ofstream out = open_output(path);
  write_meta_comment(out, meta);
  for (size_t i = 0; i < columns.size(); ++i) {
    out << (i ? "," : "") << columns[i];
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size()) {
      throw DimensionError("row width does not match the header");
    }
    for (size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_double(row[i]);
    }
    out << "\n";
  }
}

void write_json(const std::string& path, nlohmann::json payload,
                const FileMeta& meta) {
  payload["meta"] = {{"version", meta.version}, {"config_hash", meta.config_hash}};
  std::ofstream out = open_output(path);
  out << payload.dump(2) << "\n";
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

nlohmann::json to_json(const CalibrationPoint& p) {
  return {{"delta_working_ghz", p.delta_working_ghz},
          {"tau_stage1_ns", p.tau_stage1_ns},
          {"j_est_ghz", p.j_est_ghz},
          {"p_return", p.p_return},
          {"phi_geometric_rad", p.phi_geometric_rad},
          {"amplitude_ghz", p.amplitude_ghz},
          {"ramp_ns", p.ramp_ns}};
}

CalibrationPoint calibration_point_from_json(const nlohmann::json& j) {
  CalibrationPoint p;
  p.delta_working_ghz = j.at("delta_working_ghz").get<double>();
  p.tau_stage1_ns = j.at("tau_stage1_ns").get<double>();
  p.j_est_ghz = j.at("j_est_ghz").get<double>();
  p.p_return = j.at("p_return").get<double>();
  p.phi_geometric_rad = j.at("phi_geometric_rad").get<double>();
  p.amplitude_ghz = j.at("amplitude_ghz").get<double>();
  p.ramp_ns = j.at("ramp_ns").get<double>();
  return p;
}

nlohmann::json to_json(const PhaseSet& p) {
  return {{"phi12_rad", p.phi12},
          {"phi23_rad", p.phi23},
          {"phi13_rad", p.phi13},
          {"phi123_rad", p.phi123},
          {"phi_geometric_rad", p.phi_geometric},
          {"singles_rad", {p.singles[0], p.singles[1], p.singles[2]}}};
}

PhaseSet phase_set_from_json(const nlohmann::json& j) {
  PhaseSet p;
  p.phi12 = j.at("phi12_rad").get<double>();
  p.phi23 = j.at("phi23_rad").get<double>();
  p.phi13 = j.at("phi13_rad").get<double>();
  p.phi123 = j.at("phi123_rad").get<double>();
  p.phi_geometric = j.at("phi_geometric_rad").get<double>();
  for (int i = 0; i < 3; ++i) p.singles[i] = j.at("singles_rad").at(i).get<double>();
  return p;
}

nlohmann::json to_json(const CPhasePulse& p) {
  return {{"pair", pair_name(p.pair)},
          {"duration_ns", p.duration_ns},
          {"detuning_ghz", p.detuning_ghz},
          {"amplitude_ghz", p.amplitude_ghz},
          {"ramp_ns", p.ramp_ns},
          {"achieved_phase_rad", p.achieved_phase_rad},
          {"p_return", p.p_return}};
}

CPhasePulse cphase_pulse_from_json(const nlohmann::json& j) {
  CPhasePulse p;
  const std::string pair = j.at("pair").get<std::string>();
  if (pair == "q1q2") {
    p.pair = QubitPair::Q1Q2;
  } else if (pair == "q2q3") {
    p.pair = QubitPair::Q2Q3;
  } else {
    throw ValidationError("unknown pair " + pair);
  }
  p.duration_ns = j.at("duration_ns").get<double>();
  p.detuning_ghz = j.at("detuning_ghz").get<double>();
  p.amplitude_ghz = j.at("amplitude_ghz").get<double>();
  p.ramp_ns = j.at("ramp_ns").get<double>();
  p.achieved_phase_rad = j.at("achieved_phase_rad").get<double>();
  p.p_return = j.at("p_return").get<double>();
  return p;
}

nlohmann::json to_json(const GateRecipe& r) {
  nlohmann::json cancellations = nlohmann::json::array();
  for (const auto& c : r.cancellations) cancellations.push_back(to_json(c));
  return {{"stage1", to_json(r.stage1)},
          {"stage1_phases", to_json(r.stage1_phases)},
          {"vz_rad", {r.vz_rad[0], r.vz_rad[1], r.vz_rad[2]}},
          {"cancellations", cancellations},
          {"total_duration_ns", r.total_duration_ns},
          {"theta_rad", r.theta_rad},
          {"config_hash", r.config_hash}};
}

GateRecipe gate_recipe_from_json(const nlohmann::json& j) {
  GateRecipe r;
  r.stage1 = calibration_point_from_json(j.at("stage1"));
  r.stage1_phases = phase_set_from_json(j.at("stage1_phases"));
  for (int i = 0; i < 3; ++i) r.vz_rad[i] = j.at("vz_rad").at(i).get<double>();
  for (const auto& c : j.at("cancellations")) {
    r.cancellations.push_back(cphase_pulse_from_json(c));
  }
  r.total_duration_ns = j.at("total_duration_ns").get<double>();
  r.theta_rad = j.at("theta_rad").get<double>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.validate();
  return r;
}

nlohmann::json to_json(const LeakageReport& l) {
  nlohmann::json per_state = nlohmann::json::object();
  for (const auto& [key, value] : l.per_state) per_state[key] = value;
  return {{"per_state", per_state},
          {"total", l.total},
          {"second_excited", l.second_excited}};
}

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back({m(r, c).real(), m(r, c).imag()});
    }
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.size();
  if (rows == 0) return Eigen::MatrixXcd(0, 0);
  const auto cols = j.at(0).size();
  Eigen::MatrixXcd m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      m(r, c) = complexd(j.at(r).at(c).at(0).get<double>(),
                         j.at(r).at(c).at(1).get<double>());
    }
  }
  return m;
}

nlohmann::json to_json(const GateReport& r) {
  return {{"u_realized", matrix_to_json(r.u_realized)},
          {"fidelity", r.fidelity},
          {"fidelity_standard_basis", r.fidelity_standard},
          {"leakage", to_json(r.leakage)},
          {"phases", to_json(r.phases)},
          {"duration_ns", r.duration_ns},
          {"theta_target_rad", r.theta_target_rad},
          {"theta_measured_rad", r.theta_measured_rad}};
}

nlohmann::json to_json(const ZZCoefficients& z) {
  return {{"zeta12_mhz", z.zeta12_mhz},
          {"zeta23_mhz", z.zeta23_mhz},
          {"zeta13_mhz", z.zeta13_mhz},
          {"zeta123_mhz", z.zeta123_mhz}};
}

nlohmann::json to_json(const RobustnessGrid& g) {
  nlohmann::json dips = nlohmann::json::array();
  for (const auto& d : g.dips) {
    dips.push_back({{"delta", g.delta[d.col]},
                    {"zeta_mhz", g.zeta_mhz[d.row]},
                    {"fidelity", d.fidelity},
                    {"neighbor_mean", d.neighbor_mean},
                    {"min_gap_mhz", d.min_gap_mhz}});
  }
  return {{"nominal_fidelity", g.nominal},
          {"min_fidelity", g.min_fidelity},
          {"argmin",
           {{"delta", g.delta[g.argmin_col]}, {"zeta_mhz", g.zeta_mhz[g.argmin_row]}}},
          {"dips", dips}};
}

}  // namespace cczsim
