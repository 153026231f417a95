#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cczsim/pulse.hpp"

namespace cczsim {

// State vector or density matrix over the device's truncated space.
struct QuantumState {
  enum class Kind { Vector, Density };
  Kind kind = Kind::Vector;
  Eigen::VectorXcd vec;
  Eigen::MatrixXcd rho;

  static QuantumState pure(Eigen::VectorXcd v);
  static QuantumState density(Eigen::MatrixXcd m);

  Eigen::Index dim() const {
    return kind == Kind::Vector ? vec.size() : rho.rows();
  }
  QuantumState promoted() const;
  // Throws ValidationError for non-normalized / non-hermitian / negative
  // states outside tolerance.
  void validate(double tol = 1e-9) const;
};

double population(const QuantumState& state, int basis_index);

// Relaxation and pure-dephasing times per qubit label (ns). Collapse
// operators: sqrt(1/T1) a and sqrt(1/(2 Tphi)) n.
struct NoiseSpec {
  struct ModeNoise {
    std::optional<double> t1_ns;
    std::optional<double> tphi_ns;
  };
  std::map<std::string, ModeNoise> per_qubit;
  bool empty() const;
  void validate() const;
};

// Precomputed Hamiltonian pieces so per-step assembly is a cheap sum:
// H(t) = D0 + sum_m dw_m(t) N_m + sum_p s_p(t) V_p (+ static couplings).
class HamiltonianAssembler {
 public:
  explicit HamiltonianAssembler(const DeviceSpec& spec);

  int dim() const { return static_cast<int>(diag_base_.size()); }
  const ModeSpace& space() const { return space_; }
  void assemble(const ControlSample& sample, Eigen::MatrixXcd& h_out) const;
  Eigen::MatrixXcd assemble(const ControlSample& sample) const;
  // Fastest exchange-rate scale (GHz) used by the step-size guard.
  double max_coupling_rate_ghz() const { return max_rate_ghz_; }

 private:
  ModeSpace space_;
  Eigen::VectorXd diag_base_;                   // rad/ns
  std::vector<Eigen::VectorXd> number_diags_;   // occupation count per mode
  Eigen::MatrixXcd v_pair_[2];                  // rad/ns, per activation group
  Eigen::MatrixXcd v_static_;                   // rad/ns, ungrouped couplings
  bool has_static_ = false;
  double max_rate_ghz_ = 0.0;
};

// Enforces the sampling guard dt <= 0.002 / f_max with f_max = 2 max|g|.
void check_time_step(const HamiltonianAssembler& assembler, double dt_ns);

// Time-ordered propagator of the schedule: exact matrix exponential on
// control-constant spans, fixed-step midpoint exponential elsewhere.
// The result is unitary to machine precision by construction.
Eigen::MatrixXcd propagate_unitary(const DeviceSpec& spec,
                                   const PulseSchedule& schedule);

// Propagator over [t0, t1] only (used by staged compositions).
Eigen::MatrixXcd propagate_interval(const HamiltonianAssembler& assembler,
                                    const PulseSchedule& schedule, double t0,
                                    double t1, double dt_ns);

struct TrajectoryPoint {
  double t_ns = 0.0;
  QuantumState state;
};

// Lindblad master-equation evolution driven by the schedule. The coherent
// part advances by exact midpoint exponentials; the dissipator is applied
// in Strang halves around each step. Vector inputs are promoted when noise
// is present.
std::vector<TrajectoryPoint> evolve_lindblad(
    const QuantumState& initial, const DeviceSpec& spec,
    const PulseSchedule& schedule, const NoiseSpec& noise,
    const std::vector<double>& sample_times_ns);

// One gate stage: a flat-top pulse on one mode plus optional activation
// windows sharing the same span. The hold time is left free so a family of
// durations reuses the ramp propagators and one flat-top diagonalization.
struct StageTemplate {
  PulseSegment pulse;                   // hold_ns ignored; set per query
  std::vector<QubitPair> active_pairs;  // emitted as activation windows
  bool use_activation_windows = false;  // full-flavor coupler emulation
  double activation_ramp_ns = -1.0;     // <0: follow the pulse ramp

  PulseSchedule schedule(double hold_ns, double dt_ns) const;
};

class StageSolver {
 public:
  StageSolver(const DeviceSpec& spec, const StageTemplate& tmpl, double dt_ns);

  // Propagator of the full stage with the given flat-top hold.
  Eigen::MatrixXcd unitary(double hold_ns) const;
  // Eigen-decomposition of the flat-top Hamiltonian (rad/ns).
  const Eigen::VectorXd& flat_eigenvalues() const { return flat_vals_; }
  const Eigen::MatrixXcd& flat_eigenvectors() const { return flat_vecs_; }
  double ramp_ns() const { return tmpl_.pulse.ramp_ns; }
  double dt_ns() const { return dt_ns_; }

 private:
  friend class StageEntryProbe;
  friend class StageColumnProbe;
  StageTemplate tmpl_;
  double dt_ns_;
  Eigen::MatrixXcd u_up_, u_down_;
  Eigen::VectorXd flat_vals_;
  Eigen::MatrixXcd flat_vecs_;
};

// Selected propagator entries as a function of hold time, reduced to one
// dim-length dot product per entry: U(i,j; h) = sum_k C_ij[k] e^{-i l_k h}.
class StageEntryProbe {
 public:
  StageEntryProbe(const StageSolver& solver,
                  std::vector<std::pair<int, int>> entries);
  // entry values at the given hold, in the order passed at construction
  Eigen::VectorXcd at(double hold_ns) const;

 private:
  std::vector<Eigen::VectorXcd> coeffs_;
  Eigen::VectorXd vals_;
};

// One propagator column as a function of hold time (a single dim x dim
// matrix-vector product per query).
class StageColumnProbe {
 public:
  StageColumnProbe(const StageSolver& solver, int column);
  Eigen::VectorXcd at(double hold_ns) const;

 private:
  Eigen::MatrixXcd left_;
  Eigen::VectorXcd seed_;
  Eigen::VectorXd vals_;
};

}  // namespace cczsim
