#include "cczsim/gates.hpp"

#include <algorithm>
#include <cmath>

#include "cczsim/parallel.hpp"

namespace cczsim {

void GateRecipe::validate() const {
  double sum = stage1.tau_stage1_ns;
  for (const auto& c : cancellations) sum += c.duration_ns;
  if (std::abs(sum - total_duration_ns) > 1e-6) {
    throw ValidationError("recipe duration is not the sum of its stages");
  }
}

Eigen::MatrixXcd phase_target(double theta_rad) {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(8, 8);
  u(5, 5) = std::exp(complexd(0.0, -theta_rad));  // |101>
  return u;
}

Eigen::MatrixXcd standard_ccz_target() {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(8, 8);
  u(7, 7) = -1.0;  // |111>
  return u;
}

Eigen::MatrixXcd run_stage1(const DeviceSpec& spec, const CalibrationPoint& point,
                            double dt_ns) {
  const DeviceSpec run_spec =
      stage_spec(spec, {QubitPair::Q1Q2, QubitPair::Q2Q3});
  const StageSolver solver(
      run_spec, stage1_template(run_spec, point.amplitude_ghz, point.ramp_ns),
      dt_ns);
  const double hold = point.tau_stage1_ns - 2.0 * point.ramp_ns;
  if (hold < -1e-9) throw ValidationError("stage duration below ramp time");
  return solver.unitary(std::max(0.0, hold));
}

Eigen::MatrixXcd run_cphase(const DeviceSpec& spec, const CPhasePulse& pulse,
                            double dt_ns) {
  const int dim = spec.space().dim();
  if (pulse.duration_ns <= 0.0) {
    return Eigen::MatrixXcd::Identity(dim, dim);
  }
  const DeviceSpec run_spec = stage_spec(spec, {pulse.pair});
  const StageSolver solver(
      run_spec,
      cphase_template(run_spec, pulse.pair, pulse.amplitude_ghz, pulse.ramp_ns),
      dt_ns);
  const double hold = pulse.duration_ns - 2.0 * pulse.ramp_ns;
  if (hold < -1e-9) throw ValidationError("pulse duration below ramp time");
  return solver.unitary(std::max(0.0, hold));
}

Eigen::MatrixXcd computational_block(const Eigen::MatrixXcd& u_full,
                                     const DeviceSpec& spec) {
  const ModeSpace space = spec.space();
  const auto idx = computational_indices(spec, space);
  Eigen::MatrixXcd block(8, 8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) block(r, c) = u_full(idx[r], idx[c]);
  }
  return block;
}

Eigen::MatrixXcd apply_virtual_z(const Eigen::MatrixXcd& u8,
                                 const std::array<double, 3>& phases_rad) {
  if (u8.rows() != 8 || u8.cols() != 8) {
    throw DimensionError("virtual-Z expects the 8x8 computational block");
  }
  Eigen::VectorXcd d(8);
  for (int b = 0; b < 8; ++b) {
    const double phi = phases_rad[0] * ((b >> 2) & 1) +
                       phases_rad[1] * ((b >> 1) & 1) + phases_rad[2] * (b & 1);
    d[b] = std::exp(complexd(0.0, phi));
  }
  return d.asDiagonal() * u8;
}

Eigen::MatrixXcd to_standard_ccz(const Eigen::MatrixXcd& u8) {
  if (u8.rows() != 8 || u8.cols() != 8) {
    throw DimensionError("relabel expects the 8x8 computational block");
  }
  Eigen::MatrixXcd out(8, 8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) out(r ^ 2, c ^ 2) = u8(r, c);
  }
  return out;
}

Eigen::MatrixXcd assemble_total_unitary(const DeviceSpec& spec,
                                        const GateRecipe& recipe, double dt_ns,
                                        const DriftOverrides& drift) {
  recipe.validate();
  const DeviceSpec drifted = spec.with_all_couplings_scaled(drift.coupling_scale);

  CalibrationPoint stage1 = recipe.stage1;
  // A detuning drift of +zeta on the |101>/|020> splitting maps to a
  // middle-qubit shift of -zeta/2.
  stage1.amplitude_ghz -= 0.5 * drift.stage1_detuning_shift_ghz;

  Eigen::MatrixXcd u = run_stage1(drifted, stage1, dt_ns);
  for (const auto& pulse : recipe.cancellations) {
    if (pulse.duration_ns <= 0.0) continue;
    u = (run_cphase(drifted, pulse, dt_ns) * u).eval();
  }
  return u;
}

namespace {

GateReport report_from_unitary(const DeviceSpec& spec, const GateRecipe& recipe,
                               const Eigen::MatrixXcd& u_total) {
  GateReport report;
  const Eigen::MatrixXcd block = computational_block(u_total, spec);
  report.u_realized = apply_virtual_z(block, recipe.vz_rad);
  report.theta_target_rad = recipe.theta_rad;
  report.fidelity =
      average_gate_fidelity(phase_target(recipe.theta_rad), report.u_realized);
  report.fidelity_standard =
      average_gate_fidelity(to_standard_ccz(phase_target(recipe.theta_rad)),
                            to_standard_ccz(report.u_realized));
  report.leakage = leakage_from_unitary(u_total, spec);
  report.phases = extract_phases(u_total, spec);
  report.theta_measured_rad =
      wrap_angle_positive(conditional_phase(u_total, spec, 1, 0, 1));
  report.duration_ns = recipe.total_duration_ns;
  return report;
}

}  // namespace

GateReport assemble_ccz(const DeviceSpec& spec, const GateRecipe& recipe,
                        double dt_ns, const DriftOverrides& drift) {
  return report_from_unitary(spec, recipe,
                             assemble_total_unitary(spec, recipe, dt_ns, drift));
}

namespace {

CalibrationRun finish_calibration(const DeviceSpec& spec,
                                  const CalibrationPoint& point,
                                  WorkingPointResult working_point,
                                  const CalibrationSettings& settings) {
  CalibrationRun run;
  run.working_point = std::move(working_point);

  GateRecipe recipe;
  recipe.stage1 = point;
  recipe.theta_rad = settings.theta_rad;
  recipe.stage1_phases =
      measure_conditional_phases(spec, point, settings.dt_ns);

  for (const QubitPair pair : {QubitPair::Q1Q2, QubitPair::Q2Q3}) {
    const double parasitic = pair == QubitPair::Q1Q2
                                 ? recipe.stage1_phases.phi12
                                 : recipe.stage1_phases.phi23;
    recipe.cancellations.push_back(
        tune_cphase_cancellation(spec, pair, -parasitic, settings.cphase));
  }
  recipe.total_duration_ns = point.tau_stage1_ns;
  for (const auto& c : recipe.cancellations) {
    recipe.total_duration_ns += c.duration_ns;
  }

  const Eigen::MatrixXcd u_total =
      assemble_total_unitary(spec, recipe, settings.dt_ns);
  recipe.vz_rad = extract_phases(u_total, spec).singles;

  run.recipe = recipe;
  run.report = report_from_unitary(spec, recipe, u_total);
  return run;
}

}  // namespace

CalibrationRun run_calibration(const DeviceSpec& spec,
                               const CalibrationSettings& settings) {
  WorkingPointResult wpr = find_working_point(spec, settings.working_point);
  const CalibrationPoint point = wpr.point;
  return finish_calibration(spec, point, std::move(wpr), settings);
}

namespace {

struct RevivalProbeSetup {
  DeviceSpec run_spec;
  double amp_res = 0.0;
  double j_ang = 0.0;
};

RevivalProbeSetup ccphase_setup(const DeviceSpec& spec) {
  RevivalProbeSetup s;
  s.run_spec = stage_spec(spec, {QubitPair::Q1Q2, QubitPair::Q2Q3});
  s.amp_res = stage1_resonant_amplitude(spec);
  const DeviceSpec eff =
      spec.flavor == Flavor::Effective ? spec : effective_from_full(spec);
  const std::string q2 = eff.qubit_labels()[1];
  s.j_ang = std::abs(
      ghz_to_angular(two_photon_J(eff, {{q2, s.amp_res}})));
  return s;
}

struct RevivalSample {
  double theta = 0.0;
  double tau = 0.0;
  double p = 0.0;
};

// Full-return point of the |101>/|020> exchange at one detuning: first
// revival of P(|101>) with its VZ-removed conditional phase on (0, 2pi).
RevivalSample revival_at(const RevivalProbeSetup& s, const DeviceSpec& spec,
                         double delta_ghz, double ramp_ns, double dt_ns) {
  const double amp = s.amp_res - 0.5 * delta_ghz;
  const StageSolver solver(s.run_spec, stage1_template(s.run_spec, amp, ramp_ns),
                           dt_ns);
  const ModeSpace space = s.run_spec.space();
  const auto at = [&](int b1, int b2, int b3) {
    return computational_index(s.run_spec, space, b1, b2, b3);
  };
  const StageEntryProbe probe(solver, {{at(1, 0, 1), at(1, 0, 1)},
                                       {at(1, 0, 0), at(1, 0, 0)},
                                       {at(0, 0, 1), at(0, 0, 1)},
                                       {at(0, 0, 0), at(0, 0, 0)}});
  const double omega = std::hypot(ghz_to_angular(delta_ghz), 2.0 * s.j_ang);
  const double h_pred = kTwoPi / omega;
  double best_h = 0.0, best_p = -1.0;
  const double h_lo = std::max(0.0, 0.55 * h_pred - 2.0 * ramp_ns);
  for (double h = h_lo; h <= 1.5 * h_pred; h += 0.05) {
    const double p = std::norm(probe.at(h)[0]);
    if (p > best_p) {
      best_p = p;
      best_h = h;
    }
  }
  const double dh = 0.05;
  const double pm = std::norm(probe.at(std::max(0.0, best_h - dh))[0]);
  const double pp = std::norm(probe.at(best_h + dh)[0]);
  const double denom = pm - 2.0 * best_p + pp;
  if (std::abs(denom) > 1e-15) {
    const double shift = 0.5 * (pm - pp) / denom * dh;
    if (std::abs(shift) < dh) best_h += shift;
  }
  const Eigen::VectorXcd v = probe.at(best_h);
  RevivalSample out;
  out.tau = best_h + 2.0 * ramp_ns;
  out.p = std::norm(v[0]);
  out.theta = wrap_angle_positive(
      -(std::arg(v[0]) - std::arg(v[1]) - std::arg(v[2]) + std::arg(v[3])));
  (void)spec;
  return out;
}

}  // namespace

CCPhaseMap build_ccphase_map(const DeviceSpec& spec,
                             const CCPhaseMapOptions& opts) {
  const RevivalProbeSetup setup = ccphase_setup(spec);
  CCPhaseMap map;
  map.delta_ghz.resize(opts.points);
  map.theta_rad.resize(opts.points);
  map.tau_ns.resize(opts.points);
  map.p_return.resize(opts.points);
  for (int i = 0; i < opts.points; ++i) {
    map.delta_ghz[i] =
        opts.delta_min_ghz +
        (opts.delta_max_ghz - opts.delta_min_ghz) * i / (opts.points - 1);
  }
  parallel_for(opts.points, opts.jobs, [&](int i) {
    const RevivalSample rs =
        revival_at(setup, spec, map.delta_ghz[i], opts.ramp_ns, opts.dt_ns);
    map.theta_rad[i] = rs.theta;
    map.tau_ns[i] = rs.tau;
    map.p_return[i] = rs.p;
  });
  return map;
}

CCPhaseResult ccphase(const DeviceSpec& spec, double theta_rad,
                      const CCPhaseMapOptions& map_opts,
                      const CalibrationSettings& settings,
                      double theta_tolerance_rad) {
  if (theta_rad <= 0.0 || theta_rad >= kTwoPi) {
    throw ValidationError("theta must lie strictly inside (0, 2pi)");
  }
  CCPhaseResult result;
  result.map = build_ccphase_map(spec, map_opts);
  const auto& thetas = result.map.theta_rad;

  // theta decreases with detuning; locate the bracketing interval.
  int seg = -1;
  for (size_t i = 0; i + 1 < thetas.size(); ++i) {
    const double a = thetas[i], b = thetas[i + 1];
    if ((a >= theta_rad && theta_rad >= b) || (b >= theta_rad && theta_rad >= a)) {
      seg = static_cast<int>(i);
      break;
    }
  }
  if (seg < 0) {
    throw CalibrationError("requested conditional phase outside the mapped band");
  }

  const RevivalProbeSetup setup = ccphase_setup(spec);
  double lo = result.map.delta_ghz[seg], hi = result.map.delta_ghz[seg + 1];
  double theta_lo = thetas[seg];
  RevivalSample best;
  double best_delta = lo;
  best.theta = theta_lo;
  best.tau = result.map.tau_ns[seg];
  best.p = result.map.p_return[seg];
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    const RevivalSample rs =
        revival_at(setup, spec, mid, map_opts.ramp_ns, map_opts.dt_ns);
    if (std::abs(rs.theta - theta_rad) < std::abs(best.theta - theta_rad)) {
      best = rs;
      best_delta = mid;
    }
    if (std::abs(rs.theta - theta_rad) <= 0.25 * theta_tolerance_rad) break;
    const bool same_side = (rs.theta > theta_rad) == (theta_lo > theta_rad);
    if (same_side) {
      lo = mid;
      theta_lo = rs.theta;
    } else {
      hi = mid;
    }
  }
  if (std::abs(best.theta - theta_rad) > theta_tolerance_rad) {
    throw CalibrationError("conditional phase missed theta by " +
                           std::to_string(best.theta - theta_rad) + " rad");
  }

  CalibrationPoint point;
  point.amplitude_ghz = setup.amp_res - 0.5 * best_delta;
  point.ramp_ns = map_opts.ramp_ns;
  point.tau_stage1_ns = best.tau;
  point.p_return = best.p;
  point.phi_geometric_rad = wrap_angle(best.theta);
  point.delta_working_ghz = stage1_detuning(spec, point.amplitude_ghz);
  point.j_est_ghz = 0.5 / best.tau;

  CalibrationSettings s = settings;
  s.theta_rad = theta_rad;
  result.run = finish_calibration(spec, point, WorkingPointResult{}, s);
  return result;
}

}  // namespace cczsim
