#include "test_common.hpp"

using namespace cczsim;

TEST_CASE("chevron extracts the programmed couplings") {
  const DeviceSpec spec = test::paper_effective();
  const std::vector<double> g_values = {0.0, 0.005, 0.01, 0.015, 0.02};
  ChevronOptions opts;
  opts.jobs = 2;
  const ChevronResult result =
      chevron_coupling_scan(spec, QubitPair::Q1Q2, g_values, opts);

  SUBCASE("zero coupling column stays flat and reports zero") {
    CHECK(result.fitted_g_ghz[0] == 0.0);
    CHECK(result.grid.values.col(0).minCoeff() > 1.0 - 1e-6);
  }

  SUBCASE("full swap half-period matches the Rabi formula") {
    // g = 0.015 GHz on resonance: first zero of cos^2(g_ang t) at
    // 1/(4 g) ~ 16.7 ns.
    const Eigen::VectorXd col = result.grid.values.col(3);
    Eigen::Index imin = 0;
    col.segment(0, 80).minCoeff(&imin);  // first ~40 ns
    const double t_swap = result.grid.y[imin];
    CHECK(t_swap == doctest::Approx(1.0 / (4.0 * 0.015)).epsilon(0.03));
    // and the whole column follows the two-level law
    for (Eigen::Index j = 0; j < 60; ++j) {
      const double t = result.grid.y[j];
      const double expected = std::pow(std::cos(ghz_to_angular(0.015) * t), 2);
      CHECK(std::abs(col[j] - expected) < 0.01);
    }
  }

  SUBCASE("fit agrees with the programmed value within 2%") {
    for (size_t i = 1; i < g_values.size(); ++i) {
      CHECK(std::abs(result.fitted_g_ghz[i] - g_values[i]) <
            0.02 * g_values[i]);
    }
  }

  SUBCASE("full flavor is rejected") {
    CHECK_THROWS_AS(
        chevron_coupling_scan(test::paper_full(), QubitPair::Q1Q2, g_values),
        ValidationError);
  }
}

namespace {

WorkingPointOptions fast_options() {
  WorkingPointOptions opts;
  opts.jobs = 2;
  return opts;
}

}  // namespace

TEST_CASE("working point search lands in the reported window") {
  const DeviceSpec spec = test::paper_effective();
  const WorkingPointResult result = find_working_point(spec, fast_options());

  CHECK(result.point.p_return >= 0.97);
  CHECK(result.point.tau_stage1_ns >= 110.0);
  CHECK(result.point.tau_stage1_ns <= 185.0);
  CHECK(angle_distance(result.point.phi_geometric_rad, kPi) < 0.05);
  CHECK(std::abs(result.point.j_est_ghz) >= 0.0027);
  CHECK(std::abs(result.point.j_est_ghz) <= 0.0045);
  CHECK(std::abs(result.point.delta_working_ghz) < 0.002);

  SUBCASE("oscillation frequency corroborates the coupling formula") {
    const double j_formula =
        std::abs(two_photon_J(spec, {{"q2", result.point.amplitude_ghz}}));
    CHECK(std::abs(result.point.j_est_ghz - j_formula) < 0.2 * j_formula);
  }

  SUBCASE("grid refinement is stable") {
    WorkingPointOptions coarse = fast_options();
    coarse.refine = false;
    coarse.detuning_points = 31;
    const auto run_coarse = find_working_point(spec, coarse);
    WorkingPointOptions fine = coarse;
    fine.detuning_points = 61;
    const auto run_fine = find_working_point(spec, fine);
    const double coarse_step = coarse.detuning_span_ghz / (coarse.detuning_points - 1);
    CHECK(std::abs(run_fine.point.delta_working_ghz -
                   run_coarse.point.delta_working_ghz) < 0.5 * coarse_step);
  }
}

TEST_CASE("dispersive detunings return without phase accumulation") {
  const DeviceSpec spec = test::paper_effective();
  const double amp_res = stage1_resonant_amplitude(spec);
  // +20 MHz off resonance: |delta| >> 2J
  const StageSolver solver(spec, stage1_template(spec, amp_res - 0.010, 5.0),
                           0.01);
  const ModeSpace space = spec.space();
  const auto at = [&](int a, int b, int c) {
    return computational_index(spec, space, a, b, c);
  };
  const StageEntryProbe probe(solver, {{at(1, 0, 1), at(1, 0, 1)},
                                       {at(1, 0, 0), at(1, 0, 0)},
                                       {at(0, 0, 1), at(0, 0, 1)},
                                       {at(0, 0, 0), at(0, 0, 0)}});
  // search the first revival
  double best_h = 0.0, best_p = -1.0;
  for (double h = 20.0; h <= 60.0; h += 0.05) {
    const double p = std::norm(probe.at(h)[0]);
    if (p > best_p) {
      best_p = p;
      best_h = h;
    }
  }
  const Eigen::VectorXcd v = probe.at(best_h);
  const double phi = wrap_angle_positive(
      -(std::arg(v[0]) - std::arg(v[1]) - std::arg(v[2]) + std::arg(v[3])));
  CHECK(best_p > 0.99);       // full return
  CHECK(phi < 0.5 * kPi);     // but far from the pi target
}

TEST_CASE("working point failure carries diagnostics") {
  const DeviceSpec spec = test::paper_effective();
  WorkingPointOptions opts = fast_options();
  opts.detuning_points = 11;
  opts.time_points = 30;
  opts.phase_tolerance_rad = 1e-9;  // unattainable
  opts.refine = false;
  CHECK_THROWS_AS(find_working_point(spec, opts), CalibrationError);
}

TEST_CASE("phase tomography") {
  const DeviceSpec spec = test::paper_effective();
  const WorkingPointResult wp = find_working_point(spec, fast_options());
  const PhaseSet phases = measure_conditional_phases(spec, wp.point, 0.01);

  const DeviceSpec run_spec = stage_spec(spec, {QubitPair::Q1Q2, QubitPair::Q2Q3});
  const Eigen::MatrixXcd u = run_stage1(spec, wp.point, 0.01);

  SUBCASE("ramsey extraction matches the propagator diagonal") {
    CHECK(std::abs(wrap_angle(phases.phi12 -
                              conditional_phase(u, run_spec, 1, 1, 0))) < 1e-3);
    CHECK(std::abs(wrap_angle(phases.phi23 -
                              conditional_phase(u, run_spec, 0, 1, 1))) < 1e-3);
    CHECK(std::abs(wrap_angle(phases.phi13 -
                              conditional_phase(u, run_spec, 1, 0, 1))) < 1e-3);
  }

  SUBCASE("composition identity holds by construction") {
    const double direct = conditional_phase(u, run_spec, 1, 1, 1);
    CHECK(angle_distance(phases.composed_phi111(), direct) < 1e-6);
  }

  SUBCASE("virtual-Z frames leave conditional phases invariant") {
    const ModeSpace space = run_spec.space();
    Eigen::VectorXcd frame(space.dim());
    const std::array<double, 3> z = {0.37, -1.21, 2.6};
    for (int i = 0; i < space.dim(); ++i) {
      const auto occ = space.occupations(i);
      frame[i] = std::exp(complexd(0.0, z[0] * occ[0] + z[1] * occ[1] +
                                        z[2] * occ[2]));
    }
    const Eigen::MatrixXcd rotated = frame.asDiagonal() * u;
    const PhaseSet rotated_phases = extract_phases(rotated, run_spec);
    CHECK(std::abs(wrap_angle(rotated_phases.phi12 - phases.phi12)) < 1e-9);
    CHECK(std::abs(wrap_angle(rotated_phases.phi23 - phases.phi23)) < 1e-9);
    CHECK(std::abs(wrap_angle(rotated_phases.phi13 - phases.phi13)) < 1e-9);
    CHECK(std::abs(wrap_angle(rotated_phases.phi123 - phases.phi123)) < 1e-9);
  }

  SUBCASE("geometric phase carries the pi of the full cycle") {
    CHECK(angle_distance(phases.phi_geometric, kPi) < 0.2);
  }

  SUBCASE("identity evolution has no conditional phases") {
    const DeviceSpec bare = spec.with_all_couplings_scaled(0.0);
    CalibrationPoint point;
    point.amplitude_ghz = 0.0;
    point.ramp_ns = 2.0;
    point.tau_stage1_ns = 24.0;
    const PhaseSet none = measure_conditional_phases(bare, point, 0.01);
    CHECK(std::abs(none.phi12) < 1e-9);
    CHECK(std::abs(none.phi23) < 1e-9);
    CHECK(std::abs(none.phi13) < 1e-9);
    CHECK(std::abs(none.phi123) < 1e-9);
  }
}

TEST_CASE("cancellation tuning") {
  const DeviceSpec spec = test::paper_effective();

  SUBCASE("zero target is a zero-duration identity") {
    const CPhasePulse pulse =
        tune_cphase_cancellation(spec, QubitPair::Q1Q2, 0.0);
    CHECK(pulse.duration_ns == 0.0);
    CHECK(pulse.achieved_phase_rad == 0.0);
  }

  SUBCASE("tuned pulse realizes the requested conditional phase") {
    const double target = 2.4;
    const CPhasePulse pulse =
        tune_cphase_cancellation(spec, QubitPair::Q1Q2, target);
    CHECK(pulse.duration_ns > 5.0);
    CHECK(pulse.duration_ns < 40.0);
    CHECK(pulse.p_return > 0.9);

    // re-measure on the realized propagator
    const DeviceSpec run_spec = stage_spec(spec, {QubitPair::Q1Q2});
    const Eigen::MatrixXcd u = run_cphase(spec, pulse, 0.01);
    const double measured =
        wrap_angle_positive(conditional_phase(u, run_spec, 1, 1, 0));
    CHECK(std::abs(wrap_angle(measured - target)) < 0.02);
  }

  SUBCASE("unreachable target raises a calibration error") {
    CPhaseOptions opts;
    opts.phase_tolerance_rad = 1e-4;
    CHECK_THROWS_AS(
        tune_cphase_cancellation(spec, QubitPair::Q2Q3, 0.02, opts),
        CalibrationError);
  }
}
