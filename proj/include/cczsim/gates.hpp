#pragma once

#include "cczsim/calibration.hpp"
#include "cczsim/metrics.hpp"

namespace cczsim {

// Complete two-stage gate program: the geometric stage plus the tuned
// cancellation pulses and the virtual-Z frame corrections.
struct GateRecipe {
  CalibrationPoint stage1;
  PhaseSet stage1_phases;
  std::array<double, 3> vz_rad = {0.0, 0.0, 0.0};
  std::vector<CPhasePulse> cancellations;
  double total_duration_ns = 0.0;
  double theta_rad = kPi;  // target conditional phase on |101>
  std::string config_hash;

  void validate() const;  // duration additivity
};

struct GateReport {
  Eigen::MatrixXcd u_realized;  // 8x8 computational block, VZ-corrected
  double fidelity = 0.0;             // vs the |101>-phase-convention target
  double fidelity_standard = 0.0;    // vs standard CCZ after X2 relabel
  LeakageReport leakage;
  PhaseSet phases;
  double duration_ns = 0.0;
  double theta_target_rad = kPi;
  double theta_measured_rad = 0.0;
};

// Physical drifts applied while holding the recipe fixed.
struct DriftOverrides {
  double coupling_scale = 1.0;            // g -> (1 + delta) g as a factor
  double stage1_detuning_shift_ghz = 0.0; // working detuning -> + zeta
};

// Targets in the computational ordering |000>, ..., |111>.
Eigen::MatrixXcd phase_target(double theta_rad);  // e^{-i theta} on |101>
Eigen::MatrixXcd standard_ccz_target();           // -1 on |111>

// Stage-1 propagator over the full space at the calibrated point.
Eigen::MatrixXcd run_stage1(const DeviceSpec& spec, const CalibrationPoint& point,
                            double dt_ns);
// Cancellation-pulse propagator (identity for zero-duration pulses).
Eigen::MatrixXcd run_cphase(const DeviceSpec& spec, const CPhasePulse& pulse,
                            double dt_ns);

// 8x8 computational block of a full-space propagator.
Eigen::MatrixXcd computational_block(const Eigen::MatrixXcd& u_full,
                                     const DeviceSpec& spec);

// Per-qubit frame rotation diag(e^{i phi . n}) applied from the left;
// exactly unitary, never changes entry magnitudes.
Eigen::MatrixXcd apply_virtual_z(const Eigen::MatrixXcd& u8,
                                 const std::array<double, 3>& phases_rad);

// Basis relabel |x0z> <-> |x1z> (X on the middle qubit); involution that
// carries the -1 from |101> to |111>.
Eigen::MatrixXcd to_standard_ccz(const Eigen::MatrixXcd& u8);

// Sequential composition of the recipe's stages over the full space.
Eigen::MatrixXcd assemble_total_unitary(const DeviceSpec& spec,
                                        const GateRecipe& recipe, double dt_ns,
                                        const DriftOverrides& drift = {});

// Full report: VZ-corrected block, fidelities, leakage from |101>, and the
// re-measured phase set of the assembled gate.
GateReport assemble_ccz(const DeviceSpec& spec, const GateRecipe& recipe,
                        double dt_ns, const DriftOverrides& drift = {});

// --- calibration pipeline ---------------------------------------------------

struct CalibrationSettings {
  WorkingPointOptions working_point;
  CPhaseOptions cphase;
  double dt_ns = 0.01;
  double theta_rad = kPi;  // conditional-phase target
};

struct CalibrationRun {
  GateRecipe recipe;
  WorkingPointResult working_point;
  GateReport report;
};

// End-to-end tune-up: working point, phase tomography, cancellation tuning,
// virtual-Z extraction, final assembly.
CalibrationRun run_calibration(const DeviceSpec& spec,
                               const CalibrationSettings& settings);

// --- continuous-angle extension ---------------------------------------------

struct CCPhaseMapOptions {
  double delta_min_ghz = -0.018;
  double delta_max_ghz = 0.022;
  int points = 41;
  double ramp_ns = 5.0;
  double dt_ns = 0.01;
  int jobs = 1;
};

struct CCPhaseMap {
  std::vector<double> delta_ghz;
  std::vector<double> theta_rad;  // conditional |101> phase at full return
  std::vector<double> tau_ns;     // total stage duration at full return
  std::vector<double> p_return;
};

// Detuning -> conditional-phase map along the full-return ridge.
CCPhaseMap build_ccphase_map(const DeviceSpec& spec,
                             const CCPhaseMapOptions& opts = {});

struct CCPhaseResult {
  CCPhaseMap map;
  CalibrationRun run;
};

// Continuous-angle gate: inverts the map for the requested theta, then runs
// the full calibration pipeline at that detuning. Throws CalibrationError
// when theta is outside the achievable band.
CCPhaseResult ccphase(const DeviceSpec& spec, double theta_rad,
                      const CCPhaseMapOptions& map_opts,
                      const CalibrationSettings& settings,
                      double theta_tolerance_rad = 0.03);

}  // namespace cczsim
