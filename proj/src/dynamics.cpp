#include "cczsim/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace cczsim {

QuantumState QuantumState::pure(Eigen::VectorXcd v) {
  QuantumState s;
  s.kind = Kind::Vector;
  s.vec = std::move(v);
  return s;
}

QuantumState QuantumState::density(Eigen::MatrixXcd m) {
  QuantumState s;
  s.kind = Kind::Density;
  s.rho = std::move(m);
  return s;
}

QuantumState QuantumState::promoted() const {
  if (kind == Kind::Density) return *this;
  return density(vec * vec.adjoint());
}

void QuantumState::validate(double tol) const {
  if (kind == Kind::Vector) {
    if (std::abs(vec.norm() - 1.0) > tol) {
      throw ValidationError("state vector norm deviates from 1");
    }
    return;
  }
  if (rho.rows() != rho.cols()) throw ValidationError("density matrix not square");
  if (std::abs(rho.trace().real() - 1.0) > tol ||
      std::abs(rho.trace().imag()) > tol) {
    throw ValidationError("density matrix trace deviates from 1");
  }
  if (hermiticity_defect(rho) > 1e-9) {
    throw ValidationError("density matrix not hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw ValidationError("density matrix has a negative eigenvalue");
  }
}

double population(const QuantumState& state, int basis_index) {
  if (basis_index < 0 || basis_index >= state.dim()) {
    throw DimensionError("basis index out of range");
  }
  if (state.kind == QuantumState::Kind::Vector) {
    return std::norm(state.vec[basis_index]);
  }
  return state.rho(basis_index, basis_index).real();
}

bool NoiseSpec::empty() const {
  for (const auto& [label, n] : per_qubit) {
    (void)label;
    if (n.t1_ns || n.tphi_ns) return false;
  }
  return true;
}

void NoiseSpec::validate() const {
  for (const auto& [label, n] : per_qubit) {
    if ((n.t1_ns && *n.t1_ns <= 0.0) || (n.tphi_ns && *n.tphi_ns <= 0.0)) {
      throw ValidationError("noise times must be positive for " + label);
    }
  }
}

HamiltonianAssembler::HamiltonianAssembler(const DeviceSpec& spec)
    : space_(spec.space()) {
  const int dim = space_.dim();
  Eigen::VectorXd freqs(space_.n_modes());
  for (int m = 0; m < space_.n_modes(); ++m) {
    freqs[m] = space_.mode(m).frequency_ghz;
  }
  diag_base_.resize(dim);
  for (int i = 0; i < dim; ++i) {
    const auto occ = space_.occupations(i);
    double e = 0.0;
    for (int m = 0; m < space_.n_modes(); ++m) {
      const double n = occ[m];
      e += freqs[m] * n + 0.5 * space_.mode(m).anharmonicity_ghz * n * (n - 1.0);
    }
    diag_base_[i] = ghz_to_angular(e);
  }
  number_diags_.resize(space_.n_modes());
  for (int m = 0; m < space_.n_modes(); ++m) {
    number_diags_[m].resize(dim);
    for (int i = 0; i < dim; ++i) {
      number_diags_[m][i] = space_.occupations(i)[m];
    }
  }

  v_pair_[0] = Eigen::MatrixXcd::Zero(dim, dim);
  v_pair_[1] = Eigen::MatrixXcd::Zero(dim, dim);
  v_static_ = Eigen::MatrixXcd::Zero(dim, dim);

  // Rebuild the grouped coupling blocks from single-pair activations of the
  // device; this keeps the grouping logic in one place (hamiltonian.cpp).
  const DeviceSpec none =
      spec.with_pair_scale(QubitPair::Q1Q2, 0.0).with_pair_scale(QubitPair::Q2Q3, 0.0);
  const DeviceSpec only12 = spec.with_pair_scale(QubitPair::Q2Q3, 0.0);
  const DeviceSpec only23 = spec.with_pair_scale(QubitPair::Q1Q2, 0.0);
  const Eigen::MatrixXcd h_none = build_hamiltonian(none).mat;
  const Eigen::MatrixXcd h_bare =
      Eigen::MatrixXcd(diag_base_.cast<complexd>().asDiagonal());
  v_static_ = h_none - h_bare;
  has_static_ = v_static_.cwiseAbs().maxCoeff() > 0.0;
  v_pair_[0] = build_hamiltonian(only12).mat - h_none;
  v_pair_[1] = build_hamiltonian(only23).mat - h_none;

  for (const auto& [key, g] : spec.couplings_ghz) {
    (void)key;
    max_rate_ghz_ = std::max(max_rate_ghz_, 2.0 * std::abs(g));
  }
}

void HamiltonianAssembler::assemble(const ControlSample& sample,
                                    Eigen::MatrixXcd& h) const {
  const int dim = this->dim();
  h.resize(dim, dim);
  h.setZero();
  const auto scale_of = [&](QubitPair p) {
    const auto it = sample.pair_scales.find(p);
    return it == sample.pair_scales.end() ? 1.0 : it->second;
  };
  const double s12 = scale_of(QubitPair::Q1Q2);
  const double s23 = scale_of(QubitPair::Q2Q3);
  if (s12 != 0.0) h += s12 * v_pair_[0];
  if (s23 != 0.0) h += s23 * v_pair_[1];
  if (has_static_) h += v_static_;

  Eigen::VectorXd diag = diag_base_;
  for (const auto& [label, dw] : sample.offsets_ghz) {
    diag += ghz_to_angular(dw) * number_diags_[space_.mode_index(label)];
  }
  h.diagonal() += diag.cast<complexd>();
}

Eigen::MatrixXcd HamiltonianAssembler::assemble(const ControlSample& sample) const {
  Eigen::MatrixXcd h;
  assemble(sample, h);
  return h;
}

void check_time_step(const HamiltonianAssembler& assembler, double dt_ns) {
  const double f_max = assembler.max_coupling_rate_ghz();
  if (f_max > 0.0 && dt_ns > 0.002 / f_max) {
    throw ValidationError("dt too coarse: need dt <= " +
                          std::to_string(0.002 / f_max) + " ns");
  }
}

namespace {

// exp(-i H dt) for hermitian H via eigendecomposition.
Eigen::MatrixXcd hermitian_exponential(const Eigen::MatrixXcd& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed in propagator step");
  }
  const Eigen::VectorXcd phases =
      (complexd(0.0, -dt) * es.eigenvalues().cast<complexd>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Visit the integration steps of one schedule restricted to [w0, w1]:
// constant spans become a single exact step, ramped spans subdivide at
// most dt.
void for_each_step(const PulseSchedule& schedule,
                   const HamiltonianAssembler& assembler, double w0, double w1,
                   const std::vector<double>& extra_cuts,
                   const std::function<void(const Eigen::MatrixXcd& h,
                                            double t0, double t1)>& visit) {
  std::vector<double> cuts;
  for (const double t : schedule.breakpoints()) {
    if (t > w0 + 1e-12 && t < w1 - 1e-12) cuts.push_back(t);
  }
  for (const double t : extra_cuts) {
    if (t > w0 + 1e-12 && t < w1 - 1e-12) cuts.push_back(t);
  }
  cuts.push_back(w0);
  cuts.push_back(w1);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             cuts.end());

  Eigen::MatrixXcd h;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double t0 = cuts[k], t1 = cuts[k + 1];
    if (t1 - t0 < 1e-12) continue;
    if (schedule.is_constant_between(t0, t1)) {
      assembler.assemble(schedule.sample(0.5 * (t0 + t1)), h);
      visit(h, t0, t1);
      continue;
    }
    const int n = std::max(1, int(std::ceil((t1 - t0) / schedule.dt_ns() - 1e-9)));
    const double step = (t1 - t0) / n;
    for (int i = 0; i < n; ++i) {
      const double a = t0 + i * step, b = t0 + (i + 1) * step;
      assembler.assemble(schedule.sample(0.5 * (a + b)), h);
      visit(h, a, b);
    }
  }
}

}  // namespace

Eigen::MatrixXcd propagate_interval(const HamiltonianAssembler& assembler,
                                    const PulseSchedule& schedule, double t0,
                                    double t1, double dt_ns) {
  (void)dt_ns;
  Eigen::MatrixXcd u =
      Eigen::MatrixXcd::Identity(assembler.dim(), assembler.dim());
  for_each_step(schedule, assembler, t0, t1, {},
                [&](const Eigen::MatrixXcd& h, double a, double b) {
                  u = (hermitian_exponential(h, b - a) * u).eval();
                });
  return u;
}

Eigen::MatrixXcd propagate_unitary(const DeviceSpec& spec,
                                   const PulseSchedule& schedule) {
  HamiltonianAssembler assembler(spec);
  check_time_step(assembler, schedule.dt_ns());
  return propagate_interval(assembler, schedule, 0.0, schedule.total_ns(),
                            schedule.dt_ns());
}

namespace {

struct CollapseSet {
  std::vector<Eigen::MatrixXcd> ops;    // L_k
  std::vector<Eigen::MatrixXcd> gram;   // L_k^dag L_k
};

CollapseSet collapse_operators(const DeviceSpec& spec, const NoiseSpec& noise) {
  CollapseSet set;
  const ModeSpace space = spec.space();
  for (const auto& [label, n] : noise.per_qubit) {
    if (n.t1_ns) {
      Eigen::MatrixXcd l =
          std::sqrt(1.0 / *n.t1_ns) * space.ladder(label, LadderKind::Lower).mat;
      set.gram.push_back(l.adjoint() * l);
      set.ops.push_back(std::move(l));
    }
    if (n.tphi_ns) {
      Eigen::MatrixXcd l = std::sqrt(1.0 / (2.0 * *n.tphi_ns)) *
                           space.ladder(label, LadderKind::Number).mat;
      set.gram.push_back(l.adjoint() * l);
      set.ops.push_back(std::move(l));
    }
  }
  return set;
}

void apply_dissipator(const CollapseSet& set, double dt, Eigen::MatrixXcd& rho,
                      Eigen::MatrixXcd& scratch) {
  if (set.ops.empty()) return;
  scratch.setZero();
  for (size_t k = 0; k < set.ops.size(); ++k) {
    scratch += set.ops[k] * rho * set.ops[k].adjoint();
    scratch -= 0.5 * (set.gram[k] * rho + rho * set.gram[k]);
  }
  rho += dt * scratch;
}

}  // namespace

std::vector<TrajectoryPoint> evolve_lindblad(
    const QuantumState& initial, const DeviceSpec& spec,
    const PulseSchedule& schedule, const NoiseSpec& noise,
    const std::vector<double>& sample_times_ns) {
  initial.validate();
  noise.validate();
  HamiltonianAssembler assembler(spec);
  check_time_step(assembler, schedule.dt_ns());
  if (initial.dim() != assembler.dim()) {
    throw DimensionError("state dimension does not match device");
  }

  const bool noiseless = noise.empty();
  const CollapseSet collapse =
      noiseless ? CollapseSet{} : collapse_operators(spec, noise);

  // Noiseless vector inputs stay vectors; everything else runs as a
  // density matrix.
  const bool as_vector =
      noiseless && initial.kind == QuantumState::Kind::Vector;
  Eigen::VectorXcd psi;
  Eigen::MatrixXcd rho, scratch;
  if (as_vector) {
    psi = initial.vec;
  } else {
    rho = initial.promoted().rho;
    scratch.resizeLike(rho);
  }

  std::vector<double> samples = sample_times_ns;
  std::sort(samples.begin(), samples.end());
  std::vector<TrajectoryPoint> out;
  out.reserve(samples.size());
  size_t cursor = 0;
  const auto emit_until = [&](double t) {
    while (cursor < samples.size() && samples[cursor] <= t + 1e-12) {
      TrajectoryPoint p;
      p.t_ns = samples[cursor];
      p.state = as_vector ? QuantumState::pure(psi) : QuantumState::density(rho);
      out.push_back(std::move(p));
      ++cursor;
    }
  };

  emit_until(0.0);
  // With noise present, constant spans are still cut at dt so the Strang
  // halves of the dissipator stay second order.
  std::vector<double> extra = samples;
  if (!noiseless) {
    for (double t = 0.0; t < schedule.total_ns(); t += schedule.dt_ns()) {
      extra.push_back(t);
    }
  }
  for_each_step(schedule, assembler, 0.0, schedule.total_ns(), extra,
                [&](const Eigen::MatrixXcd& h, double a, double b) {
                  const double dt = b - a;
                  const Eigen::MatrixXcd u = hermitian_exponential(h, dt);
                  if (as_vector) {
                    psi = (u * psi).eval();
                  } else {
                    apply_dissipator(collapse, 0.5 * dt, rho, scratch);
                    rho = (u * rho * u.adjoint()).eval();
                    apply_dissipator(collapse, 0.5 * dt, rho, scratch);
                  }
                  emit_until(b);
                });
  emit_until(schedule.total_ns() + 1.0);
  return out;
}

PulseSchedule StageTemplate::schedule(double hold_ns, double dt_ns) const {
  if (hold_ns < 0.0) throw ValidationError("hold time negative");
  PulseSegment seg = pulse;
  seg.hold_ns = hold_ns;
  std::vector<ScheduledPulse> pulses = {{0.0, seg}};
  std::vector<ScheduledActivation> acts;
  if (use_activation_windows) {
    const double aramp = activation_ramp_ns < 0.0 ? pulse.ramp_ns : activation_ramp_ns;
    for (const QubitPair p : active_pairs) {
      ActivationSegment a;
      a.pair = p;
      a.ramp_ns = aramp;
      a.hold_ns = seg.duration_ns() - 2.0 * aramp;
      if (a.hold_ns < 0.0) throw ValidationError("activation ramp exceeds stage");
      acts.push_back({0.0, a});
    }
  }
  return PulseSchedule(std::move(pulses), seg.duration_ns(), dt_ns,
                       std::move(acts));
}

StageSolver::StageSolver(const DeviceSpec& spec, const StageTemplate& tmpl,
                         double dt_ns)
    : tmpl_(tmpl), dt_ns_(dt_ns) {
  HamiltonianAssembler assembler(spec);
  check_time_step(assembler, dt_ns);
  const double r = tmpl_.pulse.ramp_ns;
  // Reference hold long enough that up/down ramps are disjoint.
  const double h_ref = std::max(1.0, dt_ns);
  const PulseSchedule ref = tmpl_.schedule(h_ref, dt_ns);
  if (r > 0.0) {
    u_up_ = propagate_interval(assembler, ref, 0.0, r, dt_ns);
    u_down_ = propagate_interval(assembler, ref, r + h_ref, 2.0 * r + h_ref, dt_ns);
  } else {
    u_up_ = Eigen::MatrixXcd::Identity(assembler.dim(), assembler.dim());
    u_down_ = u_up_;
  }
  const Eigen::MatrixXcd h_flat = assembler.assemble(ref.sample(r + 0.5 * h_ref));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h_flat);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("flat-top eigendecomposition failed");
  }
  flat_vals_ = es.eigenvalues();
  flat_vecs_ = es.eigenvectors();
}

Eigen::MatrixXcd StageSolver::unitary(double hold_ns) const {
  if (hold_ns < 0.0) throw ValidationError("hold time negative");
  const Eigen::VectorXcd phases =
      (complexd(0.0, -hold_ns) * flat_vals_.cast<complexd>()).array().exp();
  return u_down_ * (flat_vecs_ * phases.asDiagonal() * flat_vecs_.adjoint()) *
         u_up_;
}

StageEntryProbe::StageEntryProbe(const StageSolver& solver,
                                 std::vector<std::pair<int, int>> entries)
    : vals_(solver.flat_vals_) {
  const Eigen::MatrixXcd left = solver.u_down_ * solver.flat_vecs_;
  const Eigen::MatrixXcd right = solver.flat_vecs_.adjoint() * solver.u_up_;
  coeffs_.reserve(entries.size());
  for (const auto& [row, col] : entries) {
    coeffs_.push_back(
        left.row(row).transpose().cwiseProduct(right.col(col)));
  }
}

Eigen::VectorXcd StageEntryProbe::at(double hold_ns) const {
  const Eigen::VectorXcd phases =
      (complexd(0.0, -hold_ns) * vals_.cast<complexd>()).array().exp();
  Eigen::VectorXcd out(coeffs_.size());
  for (size_t e = 0; e < coeffs_.size(); ++e) {
    out[static_cast<Eigen::Index>(e)] = coeffs_[e].cwiseProduct(phases).sum();
  }
  return out;
}

StageColumnProbe::StageColumnProbe(const StageSolver& solver, int column)
    : left_(solver.u_down_ * solver.flat_vecs_),
      seed_(solver.flat_vecs_.adjoint() * solver.u_up_.col(column)),
      vals_(solver.flat_vals_) {}

Eigen::VectorXcd StageColumnProbe::at(double hold_ns) const {
  const Eigen::VectorXcd phases =
      (complexd(0.0, -hold_ns) * vals_.cast<complexd>()).array().exp();
  return left_ * phases.cwiseProduct(seed_);
}

}  // namespace cczsim
