#pragma once

#include "cczsim/calibration.hpp"

namespace cczsim {

struct GateRecipe;  // gates.hpp

// Average gate fidelity
//   F = (|Tr(U_ideal^dag U_real)|^2 + Tr(U_real^dag U_real)) / (d (d + 1)),
// valid for sub-unitary U_real (leakage appears through the second trace).
double average_gate_fidelity(const Eigen::MatrixXcd& u_ideal,
                             const Eigen::MatrixXcd& u_real);

struct LeakageReport {
  std::map<std::string, double> per_state;  // keyed by bit pattern, e.g. "011"
  double total = 0.0;           // sum over the named computational targets
  double second_excited = 0.0;  // population on any occupation >= 2 state
};

// Population routed into the spurious computational targets (default
// {|011>, |110>}) and into occupation-2 states, for a full-space final
// state or for a propagator applied to a computational input.
LeakageReport leakage_from_state(const QuantumState& final_state,
                                 const DeviceSpec& spec,
                                 const std::vector<BasisState>& targets = {
                                     {0, 1, 1}, {1, 1, 0}});
LeakageReport leakage_from_unitary(const Eigen::MatrixXcd& u_full,
                                   const DeviceSpec& spec,
                                   const BasisState& input = {1, 0, 1},
                                   const std::vector<BasisState>& targets = {
                                       {0, 1, 1}, {1, 1, 0}});

struct RobustnessGrid {
  std::vector<double> delta;     // fractional coupling drift
  std::vector<double> zeta_mhz;  // working-detuning drift
  Eigen::MatrixXd fidelity;      // rows = zeta, cols = delta
  double nominal = 0.0;
  double min_fidelity = 0.0;
  int argmin_row = 0, argmin_col = 0;

  struct Dip {
    int row = 0, col = 0;
    double fidelity = 0.0;
    double neighbor_mean = 0.0;
    double min_gap_mhz = 0.0;  // closest dressed-level approach candidate
  };
  std::vector<Dip> dips;  // points > 3% below their neighbors' mean
};

struct RobustnessOptions {
  double delta_span = 0.05;   // scan [-span, +span]
  double zeta_span_mhz = 1.0; // scan [-span, +span]
  int delta_points = 11;
  int zeta_points = 11;
  double dt_ns = 0.01;
  int jobs = 1;
};

// Re-runs the fixed recipe under coupling and detuning drifts and records
// the fidelity surface; dips are flagged, not smoothed.
RobustnessGrid robustness_scan(const DeviceSpec& spec, const GateRecipe& recipe,
                               const RobustnessOptions& opts = {});

// Total leakage (|011> + |110> population from a |101> input) over the
// stage-1 detuning x duration window.
ScanGrid leakage_scan(const DeviceSpec& spec, const WorkingPointOptions& opts);

}  // namespace cczsim
