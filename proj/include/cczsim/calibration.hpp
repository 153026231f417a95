#pragma once

#include <array>

#include "cczsim/dynamics.hpp"

namespace cczsim {

// 2-D observable grid; values has |y| rows and |x| columns.
struct ScanGrid {
  std::string x_name, y_name;
  std::vector<double> x, y;
  Eigen::MatrixXd values;
};

// Accepted two-photon working point of the first gate stage.
struct CalibrationPoint {
  double delta_working_ghz = 0.0;  // |101>-|020> detuning at the flat top
  double tau_stage1_ns = 0.0;      // total stage duration including ramps
  double j_est_ghz = 0.0;          // 1 / (2 tau), the return-time estimate
  double p_return = 0.0;           // P(|101>) after the stage
  double phi_geometric_rad = 0.0;  // conditional |101> phase at the point
  double amplitude_ghz = 0.0;      // middle-qubit frequency shift at flat top
  double ramp_ns = 0.0;
};

// Conditional and single-qubit phases of one propagator, all in (-pi, pi],
// sign convention U_ss = e^{-i phi}: phi123 is the irreducible three-body
// part; phi13 is the conditional |101> phase (it carries the geometric
// contribution); phi_geometric subtracts the dispersive background when the
// generating schedule is known, otherwise equals phi13.
struct PhaseSet {
  double phi12 = 0.0;
  double phi23 = 0.0;
  double phi13 = 0.0;
  double phi123 = 0.0;
  double phi_geometric = 0.0;
  std::array<double, 3> singles = {0.0, 0.0, 0.0};

  double composed_phi111() const {
    return wrap_angle(phi12 + phi23 + phi13 + phi123);
  }
};

// Tuned cancellation pulse for one qubit pair.
struct CPhasePulse {
  QubitPair pair = QubitPair::Q1Q2;
  double duration_ns = 0.0;
  double detuning_ghz = 0.0;   // |11>-|20> detuning at the flat top
  double amplitude_ghz = 0.0;  // middle-qubit shift realizing it
  double ramp_ns = 0.0;
  double achieved_phase_rad = 0.0;
  double p_return = 0.0;
};

// --- shared phase tomography helpers -------------------------------------

// Device-space index of the computational pattern (b1, b2, b3).
int computational_index(const DeviceSpec& spec, const ModeSpace& space,
                        int b1, int b2, int b3);
// All eight, ordered |000>, |001>, ..., |111>.
std::array<int, 8> computational_indices(const DeviceSpec& spec,
                                         const ModeSpace& space);

// Ramsey-style extraction from a full-space propagator: seven superposition
// inputs are propagated and the accumulated coherence phases combined.
// Throws TomographyError when a superposition contrast drops below 0.5.
PhaseSet extract_phases(const Eigen::MatrixXcd& u_full, const DeviceSpec& spec);

// Conditional phase of one computational slot from the propagator diagonal
// (single-qubit frames removed), sign convention U_ss = e^{-i phi}.
double conditional_phase(const Eigen::MatrixXcd& u_full, const DeviceSpec& spec,
                         int b1, int b2, int b3);

// --- stage construction ---------------------------------------------------

// Stage-1 template: flux pulse on the middle qubit with both pairs active.
StageTemplate stage1_template(const DeviceSpec& spec, double amplitude_ghz,
                              double ramp_ns);
// Cancellation-stage template: pulse on the middle qubit with one pair
// active. For the effective flavor the inactive pair must be zeroed on the
// spec via stage_spec().
StageTemplate cphase_template(const DeviceSpec& spec, QubitPair pair,
                              double amplitude_ghz, double ramp_ns);
// The device as seen during a stage: effective flavor gets inactive pairs
// zeroed; the full flavor is returned unchanged (activation windows gate
// its couplings in time).
DeviceSpec stage_spec(const DeviceSpec& spec,
                      const std::vector<QubitPair>& active);

// Detuning of |101> vs |020> (GHz, dressed 2x2 values) at a given
// middle-qubit shift; full-flavor specs are mapped through their effective
// reduction.
double stage1_detuning(const DeviceSpec& spec, double amplitude_ghz);
// Amplitude nulling stage1_detuning (bisection).
double stage1_resonant_amplitude(const DeviceSpec& spec);

// --- operations -----------------------------------------------------------

struct ChevronOptions {
  double time_max_ns = 200.0;
  double time_step_ns = 0.5;
  double dt_ns = 0.01;
  int jobs = 1;
};

struct ChevronResult {
  ScanGrid grid;                  // exchanged-state population
  std::vector<double> fitted_g_ghz;  // per control value; 0 = no oscillation
};

// Single-excitation exchange chevron vs programmed coupling for one pair
// (effective flavor): the pair is brought to resonance and the initial
// population oscillates at twice the coupling.
ChevronResult chevron_coupling_scan(const DeviceSpec& spec, QubitPair pair,
                                    const std::vector<double>& g_values_ghz,
                                    const ChevronOptions& opts = {});

struct WorkingPointOptions {
  int detuning_points = 61;
  double detuning_span_ghz = 0.030;  // full span of the scanned detuning
  int time_points = 120;
  double time_max_ns = 250.0;
  double phase_tolerance_rad = 0.05;
  double min_p_return = 0.95;
  double ramp_ns = 5.0;
  double dt_ns = 0.01;
  bool refine = true;
  int jobs = 1;
};

struct WorkingPointResult {
  CalibrationPoint point;
  ScanGrid population;  // P(|101>) over detuning x duration
  ScanGrid phase;       // conditional |101> phase over the same grid
};

// 2-D sweep of middle-qubit shift and pulse duration from |101>; selects
// maximal return subject to the conditional phase being pi within
// tolerance; ties broken by smaller |detuning|, then shorter duration.
// Throws CalibrationError (with best-effort diagnostics) if nothing
// qualifies.
WorkingPointResult find_working_point(const DeviceSpec& spec,
                                      const WorkingPointOptions& opts = {});

// Phases accumulated by the calibrated stage-1 pulse, including the
// background-subtracted geometric phase.
PhaseSet measure_conditional_phases(const DeviceSpec& spec,
                                    const CalibrationPoint& point,
                                    double dt_ns);

struct CPhaseOptions {
  double ramp_ns = 1.0;
  double dt_ns = 0.01;
  double phase_tolerance_rad = 0.02;
  double max_duration_ns = 60.0;
  double min_p_return = 0.9;
};

// Finds the near-resonant |11>/|20> full-return pulse whose conditional
// phase matches the target (wrapped). A target within tolerance of zero
// returns a zero-duration identity.
CPhasePulse tune_cphase_cancellation(const DeviceSpec& spec, QubitPair pair,
                                     double target_phase_rad,
                                     const CPhaseOptions& opts = {});

}  // namespace cczsim
