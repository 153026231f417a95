#include "cczsim/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "cczsim/parallel.hpp"

namespace cczsim {

namespace {

std::string middle_qubit(const DeviceSpec& spec) {
  return spec.qubit_labels()[1];
}

DeviceSpec effective_view(const DeviceSpec& spec) {
  return spec.flavor == Flavor::Effective ? spec : effective_from_full(spec);
}

}  // namespace

int computational_index(const DeviceSpec& spec, const ModeSpace& space, int b1,
                        int b2, int b3) {
  const auto qubits = spec.qubit_labels();
  BasisState occ(space.n_modes(), 0);
  occ[space.mode_index(qubits[0])] = b1;
  occ[space.mode_index(qubits[1])] = b2;
  occ[space.mode_index(qubits[2])] = b3;
  return space.basis_index(occ);
}

std::array<int, 8> computational_indices(const DeviceSpec& spec,
                                         const ModeSpace& space) {
  std::array<int, 8> out{};
  for (int b = 0; b < 8; ++b) {
    out[b] = computational_index(spec, space, (b >> 2) & 1, (b >> 1) & 1, b & 1);
  }
  return out;
}

namespace {

// Ramsey phase of the superposition (|a> + |b>)/sqrt(2) after applying U:
// minus the accumulated coherence argument, so U ~ e^{-i phi} convention.
double ramsey_phase(const Eigen::MatrixXcd& u, int a, int b) {
  const complexd amp_a = (u(a, a) + u(a, b)) / std::sqrt(2.0);
  const complexd amp_b = (u(b, a) + u(b, b)) / std::sqrt(2.0);
  const double contrast = 2.0 * std::abs(amp_a) * std::abs(amp_b);
  if (contrast < 0.5) {
    throw TomographyError("superposition contrast " + std::to_string(contrast) +
                          " below 0.5 (excess leakage)");
  }
  return -std::arg(amp_b * std::conj(amp_a));
}

}  // namespace

PhaseSet extract_phases(const Eigen::MatrixXcd& u_full, const DeviceSpec& spec) {
  const ModeSpace space = spec.space();
  const auto idx = computational_indices(spec, space);
  const auto at = [&](int b1, int b2, int b3) {
    return idx[(b1 << 2) | (b2 << 1) | b3];
  };

  const double phi_0p0 = ramsey_phase(u_full, at(0, 0, 0), at(0, 1, 0));
  const double phi_1p0 = ramsey_phase(u_full, at(1, 0, 0), at(1, 1, 0));
  const double phi_0p1 = ramsey_phase(u_full, at(0, 0, 1), at(0, 1, 1));
  const double phi_1p1 = ramsey_phase(u_full, at(1, 0, 1), at(1, 1, 1));
  const double phi_00p = ramsey_phase(u_full, at(0, 0, 0), at(0, 0, 1));
  const double phi_10p = ramsey_phase(u_full, at(1, 0, 0), at(1, 0, 1));
  const double phi_p00 = ramsey_phase(u_full, at(0, 0, 0), at(1, 0, 0));

  PhaseSet p;
  p.phi12 = wrap_angle(phi_1p0 - phi_0p0);
  p.phi23 = wrap_angle(phi_0p1 - phi_0p0);
  p.phi13 = wrap_angle(phi_10p - phi_00p);
  p.phi123 = wrap_angle(phi_1p1 - phi_0p0 - p.phi12 - p.phi23);
  p.singles = {wrap_angle(phi_p00), wrap_angle(phi_0p0), wrap_angle(phi_00p)};
  p.phi_geometric = p.phi13;
  return p;
}

double conditional_phase(const Eigen::MatrixXcd& u_full, const DeviceSpec& spec,
                         int b1, int b2, int b3) {
  const ModeSpace space = spec.space();
  const auto at = [&](int x, int y, int z) {
    return computational_index(spec, space, x, y, z);
  };
  const double t000 = std::arg(u_full(at(0, 0, 0), at(0, 0, 0)));
  const double ts = std::arg(u_full(at(b1, b2, b3), at(b1, b2, b3)));
  double singles = 0.0;
  if (b1) singles += std::arg(u_full(at(1, 0, 0), at(1, 0, 0))) - t000;
  if (b2) singles += std::arg(u_full(at(0, 1, 0), at(0, 1, 0))) - t000;
  if (b3) singles += std::arg(u_full(at(0, 0, 1), at(0, 0, 1))) - t000;
  return wrap_angle(-(ts - singles - t000));
}

StageTemplate stage1_template(const DeviceSpec& spec, double amplitude_ghz,
                              double ramp_ns) {
  StageTemplate t;
  t.pulse.target = middle_qubit(spec);
  t.pulse.amplitude_ghz = amplitude_ghz;
  t.pulse.ramp_ns = ramp_ns;
  t.active_pairs = {QubitPair::Q1Q2, QubitPair::Q2Q3};
  t.use_activation_windows = spec.flavor == Flavor::Full;
  return t;
}

StageTemplate cphase_template(const DeviceSpec& spec, QubitPair pair,
                              double amplitude_ghz, double ramp_ns) {
  StageTemplate t;
  t.pulse.target = middle_qubit(spec);
  t.pulse.amplitude_ghz = amplitude_ghz;
  t.pulse.ramp_ns = ramp_ns;
  t.active_pairs = {pair};
  t.use_activation_windows = spec.flavor == Flavor::Full;
  return t;
}

DeviceSpec stage_spec(const DeviceSpec& spec,
                      const std::vector<QubitPair>& active) {
  if (spec.flavor == Flavor::Full) return spec;
  DeviceSpec out = spec;
  for (const QubitPair p : {QubitPair::Q1Q2, QubitPair::Q2Q3}) {
    if (std::find(active.begin(), active.end(), p) == active.end()) {
      out = out.with_pair_scale(p, 0.0);
    }
  }
  return out;
}

double stage1_detuning(const DeviceSpec& spec, double amplitude_ghz) {
  const DeviceSpec eff = effective_view(spec);
  return project_101_020(eff, {{middle_qubit(eff), amplitude_ghz}}).detuning_ghz();
}

double stage1_resonant_amplitude(const DeviceSpec& spec) {
  const DeviceSpec eff = effective_view(spec);
  const std::string q2 = middle_qubit(eff);
  const auto detuning = [&](double amp) {
    return project_101_020(eff, {{q2, amp}}).detuning_ghz();
  };
  const double d0 = detuning(0.0);
  double lo = d0 / 2.0 - 0.01, hi = d0 / 2.0 + 0.01;
  double flo = detuning(lo), fhi = detuning(hi);
  if (flo * fhi > 0.0) {
    throw CalibrationError("two-photon resonance not bracketed");
  }
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = detuning(mid);
    if (flo * fm <= 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

// DFT peak with Hann window and log-parabolic interpolation; 0 when the
// series is flat.
double fit_oscillation_frequency(double sample_step_ns,
                                 const Eigen::VectorXd& series) {
  const int n = static_cast<int>(series.size());
  if (n < 8) throw ValidationError("too few samples for a frequency fit");
  if (series.maxCoeff() - series.minCoeff() < 1e-3) return 0.0;

  Eigen::VectorXd y = series.array() - series.mean();
  for (int j = 0; j < n; ++j) {
    y[j] *= 0.5 * (1.0 - std::cos(kTwoPi * j / (n - 1)));
  }
  const int kmax = n / 2;
  Eigen::VectorXd mag(kmax + 1);
  mag[0] = 0.0;
  for (int k = 1; k <= kmax; ++k) {
    complexd acc(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      acc += y[j] * std::exp(complexd(0.0, -kTwoPi * j * k / n));
    }
    mag[k] = std::abs(acc);
  }
  int peak = 1;
  for (int k = 2; k <= kmax; ++k) {
    if (mag[k] > mag[peak]) peak = k;
  }
  double delta = 0.0;
  if (peak > 1 && peak < kmax && mag[peak - 1] > 0 && mag[peak + 1] > 0) {
    const double la = std::log(mag[peak - 1]);
    const double lb = std::log(mag[peak]);
    const double lc = std::log(mag[peak + 1]);
    const double denom = la - 2.0 * lb + lc;
    if (std::abs(denom) > 1e-12) delta = 0.5 * (la - lc) / denom;
  }
  return (peak + delta) / (n * sample_step_ns);
}

}  // namespace

ChevronResult chevron_coupling_scan(const DeviceSpec& spec, QubitPair pair,
                                    const std::vector<double>& g_values_ghz,
                                    const ChevronOptions& opts) {
  if (spec.flavor != Flavor::Effective) {
    throw ValidationError(
        "chevron scan runs on the effective flavor (map full devices first)");
  }
  const auto qubits = spec.qubit_labels();
  const std::string qa = pair == QubitPair::Q1Q2 ? qubits[0] : qubits[1];
  const std::string qb = pair == QubitPair::Q1Q2 ? qubits[1] : qubits[2];

  const DeviceSpec base = stage_spec(spec, {pair});
  const ModeSpace space = base.space();
  double wa = 0.0, wb = 0.0;
  for (const auto& m : base.modes) {
    if (m.label == qa) wa = m.frequency_ghz;
    if (m.label == qb) wb = m.frequency_ghz;
  }
  // Bring the pair into single-excitation resonance by shifting the middle
  // qubit; for q1q2 the middle qubit is qb, for q2q3 it is qa.
  FrequencyOffsets offsets;
  const std::string mid = middle_qubit(base);
  offsets[mid] = (mid == qa) ? wb - wa : wa - wb;

  BasisState init(space.n_modes(), 0);
  init[space.mode_index(qa)] = 1;
  const int init_idx = space.basis_index(init);

  const int nt = static_cast<int>(opts.time_max_ns / opts.time_step_ns) + 1;
  std::vector<double> times(nt);
  for (int j = 0; j < nt; ++j) times[j] = j * opts.time_step_ns;

  ChevronResult result;
  result.grid.x_name = "g_ghz";
  result.grid.y_name = "time_ns";
  result.grid.x = g_values_ghz;
  result.grid.y = times;
  result.grid.values.resize(nt, static_cast<Eigen::Index>(g_values_ghz.size()));
  result.fitted_g_ghz.assign(g_values_ghz.size(), 0.0);

  parallel_for(static_cast<int>(g_values_ghz.size()), opts.jobs, [&](int c) {
    DeviceSpec spec_g = base;
    spec_g.set_coupling(qa, qb, g_values_ghz[c]);
    const Eigen::MatrixXcd h = build_effective(spec_g, offsets).mat;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const Eigen::VectorXd weights =
        es.eigenvectors().row(init_idx).cwiseAbs2();
    Eigen::VectorXd column(nt);
    for (int j = 0; j < nt; ++j) {
      complexd amp(0.0, 0.0);
      for (int k = 0; k < weights.size(); ++k) {
        amp += weights[k] * std::exp(complexd(0.0, -es.eigenvalues()[k] * times[j]));
      }
      column[j] = std::norm(amp);
    }
    result.grid.values.col(c) = column;
    const double f = fit_oscillation_frequency(opts.time_step_ns, column);
    result.fitted_g_ghz[c] = 0.5 * f;
  });
  return result;
}

namespace {

struct GridSelection {
  bool found = false;
  int row = -1, col = -1;
  double p = -1.0, phi = 0.0;
  // diagnostics when nothing qualifies
  double best_p_anywhere = -1.0;
  double phi_at_best_p = 0.0;
};

GridSelection select_working_point(const Eigen::MatrixXd& pop,
                                   const Eigen::MatrixXd& phase,
                                   const std::vector<double>& detunings,
                                   const std::vector<double>& taus, double tol,
                                   double min_p) {
  GridSelection sel;
  for (int c = 0; c < pop.cols(); ++c) {
    for (int r = 0; r < pop.rows(); ++r) {
      const double p = pop(r, c);
      if (p > sel.best_p_anywhere) {
        sel.best_p_anywhere = p;
        sel.phi_at_best_p = phase(r, c);
      }
      if (angle_distance(phase(r, c), kPi) >= tol) continue;
      if (p < min_p) continue;
      bool better = false;
      if (!sel.found || p > sel.p + 1e-12) {
        better = true;
      } else if (std::abs(p - sel.p) <= 1e-12) {
        const double d_new = std::abs(detunings[c]);
        const double d_old = std::abs(detunings[sel.col]);
        if (d_new < d_old - 1e-15 ||
            (std::abs(d_new - d_old) <= 1e-15 && taus[r] < taus[sel.row])) {
          better = true;
        }
      }
      if (better) {
        sel.found = true;
        sel.row = r;
        sel.col = c;
        sel.p = p;
        sel.phi = phase(r, c);
      }
    }
  }
  return sel;
}

}  // namespace

WorkingPointResult find_working_point(const DeviceSpec& spec,
                                      const WorkingPointOptions& opts) {
  const DeviceSpec run_spec =
      stage_spec(spec, {QubitPair::Q1Q2, QubitPair::Q2Q3});
  const double amp_res = stage1_resonant_amplitude(spec);
  const double tau_min = 2.0 * opts.ramp_ns;
  if (opts.time_max_ns <= tau_min) {
    throw ValidationError("time range does not reach beyond the ramps");
  }

  const auto evaluate_grid = [&](const std::vector<double>& amps,
                                 const std::vector<double>& taus,
                                 Eigen::MatrixXd& pop, Eigen::MatrixXd& phase,
                                 std::vector<double>& detunings) {
    const int nc = static_cast<int>(amps.size());
    const int nr = static_cast<int>(taus.size());
    pop.resize(nr, nc);
    phase.resize(nr, nc);
    detunings.assign(nc, 0.0);
    parallel_for(nc, opts.jobs, [&](int c) {
      detunings[c] = stage1_detuning(spec, amps[c]);
      const StageSolver solver(
          run_spec, stage1_template(run_spec, amps[c], opts.ramp_ns), opts.dt_ns);
      const ModeSpace space = run_spec.space();
      const auto at = [&](int b1, int b2, int b3) {
        return computational_index(run_spec, space, b1, b2, b3);
      };
      const int i101 = at(1, 0, 1), i100 = at(1, 0, 0), i001 = at(0, 0, 1),
                i000 = at(0, 0, 0);
      const StageEntryProbe probe(solver, {{i101, i101},
                                           {i100, i100},
                                           {i001, i001},
                                           {i000, i000}});
      for (int r = 0; r < nr; ++r) {
        const Eigen::VectorXcd v = probe.at(taus[r] - tau_min);
        pop(r, c) = std::norm(v[0]);
        phase(r, c) = wrap_angle(-(std::arg(v[0]) - std::arg(v[1]) -
                                   std::arg(v[2]) + std::arg(v[3])));
      }
    });
  };

  const auto linspace = [](double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
      v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    }
    return v;
  };

  // Detuning axis maps to amplitude with slope -1/2.
  std::vector<double> amps(opts.detuning_points);
  {
    const auto deltas =
        linspace(-opts.detuning_span_ghz / 2.0, opts.detuning_span_ghz / 2.0,
                 opts.detuning_points);
    for (size_t i = 0; i < deltas.size(); ++i) {
      amps[i] = amp_res - deltas[i] / 2.0;
    }
  }
  std::vector<double> taus = linspace(tau_min, opts.time_max_ns, opts.time_points);

  WorkingPointResult out;
  std::vector<double> detunings;
  evaluate_grid(amps, taus, out.population.values, out.phase.values, detunings);
  out.population.x_name = out.phase.x_name = "detuning_ghz";
  out.population.y_name = out.phase.y_name = "duration_ns";
  out.population.x = out.phase.x = detunings;
  out.population.y = out.phase.y = taus;

  GridSelection sel =
      select_working_point(out.population.values, out.phase.values, detunings,
                           taus, opts.phase_tolerance_rad, opts.min_p_return);
  if (!sel.found) {
    throw CalibrationError(
        "no working point satisfies the phase and return thresholds; best "
        "return " +
        std::to_string(sel.best_p_anywhere) + " with conditional phase " +
        std::to_string(sel.phi_at_best_p));
  }

  double amp_sel = amps[sel.col];
  double tau_sel = taus[sel.row];
  double p_sel = sel.p, phi_sel = sel.phi, delta_sel = detunings[sel.col];

  if (opts.refine && amps.size() > 1 && taus.size() > 1) {
    const double amp_step = std::abs(amps[1] - amps[0]);
    const double tau_step = taus[1] - taus[0];
    const auto amps_f = linspace(amp_sel - 1.5 * amp_step,
                                 amp_sel + 1.5 * amp_step, 21);
    const auto taus_f = linspace(std::max(tau_min, tau_sel - 1.5 * tau_step),
                                 tau_sel + 1.5 * tau_step, 21);
    Eigen::MatrixXd pop_f, phase_f;
    std::vector<double> det_f;
    evaluate_grid(amps_f, taus_f, pop_f, phase_f, det_f);
    const GridSelection fine =
        select_working_point(pop_f, phase_f, det_f, taus_f,
                             opts.phase_tolerance_rad, opts.min_p_return);
    if (fine.found) {
      amp_sel = amps_f[fine.col];
      tau_sel = taus_f[fine.row];
      p_sel = fine.p;
      phi_sel = fine.phi;
      delta_sel = det_f[fine.col];
    }
  }

  out.point.amplitude_ghz = amp_sel;
  out.point.ramp_ns = opts.ramp_ns;
  out.point.tau_stage1_ns = tau_sel;
  out.point.p_return = p_sel;
  out.point.phi_geometric_rad = phi_sel;
  out.point.delta_working_ghz = delta_sel;
  out.point.j_est_ghz = 0.5 / tau_sel;
  return out;
}

PhaseSet measure_conditional_phases(const DeviceSpec& spec,
                                    const CalibrationPoint& point,
                                    double dt_ns) {
  const DeviceSpec run_spec =
      stage_spec(spec, {QubitPair::Q1Q2, QubitPair::Q2Q3});
  const StageTemplate tmpl =
      stage1_template(run_spec, point.amplitude_ghz, point.ramp_ns);
  const StageSolver solver(run_spec, tmpl, dt_ns);
  const double hold = point.tau_stage1_ns - 2.0 * point.ramp_ns;
  if (hold < -1e-9) throw ValidationError("stage duration below ramp time");
  const Eigen::MatrixXcd u = solver.unitary(std::max(0.0, hold));
  PhaseSet phases = extract_phases(u, run_spec);

  // Dispersive background of the |101> conditional phase, integrated over
  // the pulse with the resonant |020> channel removed; the remainder is the
  // geometric contribution of the two-photon cycle.
  const DeviceSpec eff = effective_view(spec);
  const std::string q2 = middle_qubit(eff);
  const PulseSegment pulse{q2, point.amplitude_ghz, point.ramp_ns,
                           std::max(0.0, hold), PulseShape::FlatTopCosine};
  const auto zeta13_ghz = [&](double t) {
    const double env = pulse.envelope(t);
    DeviceSpec at_t = eff;
    if (spec.flavor == Flavor::Full) {
      // couplings follow the activation window
      const ActivationSegment act{QubitPair::Q1Q2, point.ramp_ns,
                                  std::max(0.0, hold)};
      at_t = at_t.with_all_couplings_scaled(act.envelope(t));
    }
    return zz_background(at_t, {{q2, env * point.amplitude_ghz}}).zeta13_mhz /
           1e3;
  };
  const int n = 64;  // Simpson panels over the pulse
  const double width = point.tau_stage1_ns;
  double integral = zeta13_ghz(0.0) + zeta13_ghz(width);
  for (int i = 1; i < n; ++i) {
    integral += (i % 2 ? 4.0 : 2.0) * zeta13_ghz(width * i / n);
  }
  integral *= width / (3.0 * n);
  phases.phi_geometric = wrap_angle(phases.phi13 - kTwoPi * integral);
  return phases;
}

CPhasePulse tune_cphase_cancellation(const DeviceSpec& spec, QubitPair pair,
                                     double target_phase_rad,
                                     const CPhaseOptions& opts) {
  CPhasePulse result;
  result.pair = pair;
  result.ramp_ns = opts.ramp_ns;

  const double target = wrap_angle_positive(target_phase_rad);
  if (std::min(target, kTwoPi - target) <= opts.phase_tolerance_rad) {
    result.achieved_phase_rad = 0.0;
    result.p_return = 1.0;
    return result;  // zero-duration identity
  }

  const DeviceSpec run_spec = stage_spec(spec, {pair});
  const DeviceSpec eff = effective_view(spec);
  const std::string q2 = middle_qubit(eff);
  const auto q = eff.qubit_labels();

  // |11> <-> |20> resonance of the pair, reached by shifting the middle
  // qubit; detuning(amp) = amp_res - amp.
  double w_other = 0.0;
  for (const auto& m : eff.modes) {
    if (pair == QubitPair::Q1Q2 && m.label == q[0]) w_other = m.frequency_ghz;
    if (pair == QubitPair::Q2Q3 && m.label == q[2]) w_other = m.frequency_ghz;
  }
  const double w2 = eff.modes[1].frequency_ghz;
  const double alpha2 = eff.modes[1].anharmonicity_ghz;
  const double amp_res = w_other - w2 - alpha2;
  const double g_pair = pair == QubitPair::Q1Q2 ? eff.coupling(q[0], q[1])
                                                : eff.coupling(q[1], q[2]);
  const double g_ang = ghz_to_angular(std::sqrt(2.0) * std::abs(g_pair));
  if (g_ang <= 0.0) {
    throw CalibrationError("pair coupling vanishes; no exchange available");
  }

  const ModeSpace space = run_spec.space();
  const auto at = [&](int b1, int b2, int b3) {
    return computational_index(run_spec, space, b1, b2, b3);
  };
  const int i11 = pair == QubitPair::Q1Q2 ? at(1, 1, 0) : at(0, 1, 1);
  const int i10 = pair == QubitPair::Q1Q2 ? at(1, 0, 0) : at(0, 1, 0);
  const int i01 = pair == QubitPair::Q1Q2 ? at(0, 1, 0) : at(0, 0, 1);
  const int i00 = at(0, 0, 0);

  struct Eval {
    double phi = 0.0, hold = 0.0, p = 0.0;
  };
  const auto evaluate = [&](double delta_ghz) {
    const StageSolver solver(
        run_spec,
        cphase_template(run_spec, pair, amp_res - delta_ghz, opts.ramp_ns),
        opts.dt_ns);
    const StageEntryProbe probe(
        solver, {{i11, i11}, {i10, i10}, {i01, i01}, {i00, i00}});
    const double omega =
        std::hypot(ghz_to_angular(delta_ghz), 2.0 * g_ang);
    const double h_pred = kTwoPi / omega;
    double best_h = 0.0, best_p = -1.0;
    const double h_lo = std::max(0.0, 0.5 * h_pred - 2.0 * opts.ramp_ns);
    const double h_hi = 1.6 * h_pred;
    for (double h = h_lo; h <= h_hi; h += 0.02) {
      const double p = std::norm(probe.at(h)[0]);
      if (p > best_p) {
        best_p = p;
        best_h = h;
      }
    }
    // local parabolic refinement of the revival
    const double dh = 0.02;
    const double pm = std::norm(probe.at(std::max(0.0, best_h - dh))[0]);
    const double pp = std::norm(probe.at(best_h + dh)[0]);
    const double denom = pm - 2.0 * best_p + pp;
    if (std::abs(denom) > 1e-15) {
      const double shift = 0.5 * (pm - pp) / denom * dh;
      if (std::abs(shift) < dh) best_h += shift;
    }
    const Eigen::VectorXcd v = probe.at(best_h);
    Eval e;
    e.hold = best_h;
    e.p = std::norm(v[0]);
    e.phi = wrap_angle_positive(-(std::arg(v[0]) - std::arg(v[1]) -
                                  std::arg(v[2]) + std::arg(v[3])));
    return e;
  };

  // phi(delta) decreases monotonically from ~2pi to ~0 across the bracket.
  const double delta_max = 3.0 * angular_to_ghz(2.0 * g_ang);
  double lo = -delta_max, hi = delta_max;
  Eval elo = evaluate(lo), ehi = evaluate(hi);
  if (!(ehi.phi <= target && target <= elo.phi)) {
    throw CalibrationError("target conditional phase " + std::to_string(target) +
                           " outside achievable band [" +
                           std::to_string(ehi.phi) + ", " +
                           std::to_string(elo.phi) + "]");
  }
  Eval best = std::abs(elo.phi - target) < std::abs(ehi.phi - target) ? elo : ehi;
  double best_delta = std::abs(elo.phi - target) < std::abs(ehi.phi - target)
                          ? lo
                          : hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Eval em = evaluate(mid);
    if (std::abs(em.phi - target) < std::abs(best.phi - target)) {
      best = em;
      best_delta = mid;
    }
    if (std::abs(em.phi - target) <= 0.25 * opts.phase_tolerance_rad) break;
    if (em.phi > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  if (std::abs(best.phi - target) > opts.phase_tolerance_rad) {
    throw CalibrationError("cancellation phase missed target by " +
                           std::to_string(best.phi - target) + " rad");
  }
  result.duration_ns = best.hold + 2.0 * opts.ramp_ns;
  if (result.duration_ns > opts.max_duration_ns) {
    throw CalibrationError("cancellation pulse exceeds the duration cap");
  }
  if (best.p < opts.min_p_return) {
    throw CalibrationError("cancellation revival too weak (p = " +
                           std::to_string(best.p) + ")");
  }
  result.detuning_ghz = best_delta;
  result.amplitude_ghz = amp_res - best_delta;
  result.achieved_phase_rad = wrap_angle(best.phi);
  result.p_return = best.p;
  return result;
}

}  // namespace cczsim
