#include "test_common.hpp"

using namespace cczsim;

namespace {

// One calibration shared by the heavier gate tests.
const CalibrationRun& paper_run() {
  static const CalibrationRun run = [] {
    CalibrationSettings settings;
    settings.working_point.jobs = 2;
    return run_calibration(test::paper_effective(), settings);
  }();
  return run;
}

}  // namespace

TEST_CASE("targets and relabeling") {
  const Eigen::MatrixXcd shifted = phase_target(kPi);
  CHECK(shifted(5, 5) == complexd(-1.0, 0.0));
  CHECK(std::abs(shifted.trace() - complexd(6.0, 0.0)) < 1e-15);

  const Eigen::MatrixXcd standard = to_standard_ccz(shifted);
  CHECK(standard(7, 7) == complexd(-1.0, 0.0));
  CHECK(standard(5, 5) == complexd(1.0, 0.0));
  CHECK(test::max_abs(standard - standard_ccz_target()) < 1e-15);

  // involution
  CHECK(test::max_abs(to_standard_ccz(standard) - shifted) < 1e-15);

  // fidelity is invariant under the conjugation
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Random(8, 8);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(u);
  u = qr.householderQ();
  const double direct = average_gate_fidelity(shifted, u);
  const double conjugated =
      average_gate_fidelity(standard, to_standard_ccz(u));
  CHECK(std::abs(direct - conjugated) < 1e-12);
}

TEST_CASE("virtual-Z bookkeeping") {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Random(8, 8);

  SUBCASE("zero phases act as identity") {
    CHECK(test::max_abs(apply_virtual_z(u, {0.0, 0.0, 0.0}) - u) == 0.0);
  }

  SUBCASE("magnitudes never change") {
    const Eigen::MatrixXcd rotated = apply_virtual_z(u, {0.3, -1.1, 2.2});
    CHECK(test::max_abs(rotated.cwiseAbs() - u.cwiseAbs()) < 1e-14);
  }

  SUBCASE("correcting by the measured singles realigns the frame") {
    const auto& run = paper_run();
    const Eigen::MatrixXcd total = assemble_total_unitary(
        test::paper_effective(), run.recipe, 0.01);
    const DeviceSpec spec = test::paper_effective();
    const Eigen::MatrixXcd block = computational_block(total, spec);
    const Eigen::MatrixXcd corrected =
        apply_virtual_z(block, run.recipe.vz_rad);
    for (const int slot : {1, 2, 4}) {  // |001>, |010>, |100>
      CHECK(corrected(slot, slot).imag() == doctest::Approx(0.0).epsilon(1e-6));
      CHECK(corrected(slot, slot).real() > 0.0);
    }
  }
}

TEST_CASE("stage-1 propagator at the calibrated point") {
  const auto& run = paper_run();
  const DeviceSpec spec = test::paper_effective();
  const Eigen::MatrixXcd u = run_stage1(spec, run.recipe.stage1, 0.01);
  const ModeSpace space = spec.space();
  const int i101 = space.basis_index({1, 0, 1});
  const int i020 = space.basis_index({0, 2, 0});
  const int i000 = space.basis_index({0, 0, 0});

  CHECK(std::abs(u(i101, i101)) >= 0.97);
  CHECK(angle_distance(conditional_phase(u, spec, 1, 0, 1), kPi) < 0.05);
  CHECK(std::abs(u(i000, i000) - complexd(1.0, 0.0)) < 1e-9);
  CHECK(std::abs(u(i020, i101)) <= 0.25);
}

TEST_CASE("assembled gate meets the headline numbers") {
  const auto& run = paper_run();
  const GateReport& report = run.report;

  CHECK(report.fidelity >= 0.99);
  CHECK(std::abs(report.fidelity - report.fidelity_standard) < 1e-9);
  CHECK(report.duration_ns >= 135.0);
  CHECK(report.duration_ns <= 253.0);
  CHECK(angle_distance(report.theta_measured_rad, kPi) < 0.05);

  SUBCASE("residual |111> phase is cancelled") {
    const double residual =
        wrap_angle(report.phases.composed_phi111() - kPi);
    CHECK(std::abs(residual) < 0.05);
  }

  SUBCASE("diagonal dominance of the realized block") {
    double off = 0.0;
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        if (r != c) off += std::norm(report.u_realized(r, c));
      }
    }
    CHECK(off <= 0.02);
  }

  SUBCASE("sub-unitarity window") {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(report.u_realized);
    const double smax = svd.singularValues().maxCoeff();
    const double smin = svd.singularValues().minCoeff();
    CHECK(smax <= 1.0 + 1e-6);
    CHECK(smin >= 1.0 - report.leakage.total -
                      report.leakage.second_excited - 0.01);
  }

  SUBCASE("cancellation durations sit near the quarter-period scale") {
    REQUIRE(run.recipe.cancellations.size() == 2);
    for (const auto& c : run.recipe.cancellations) {
      CHECK(c.duration_ns > 10.0);
      CHECK(c.duration_ns < 35.0);
    }
  }
}

TEST_CASE("recipe duration invariant is enforced") {
  GateRecipe recipe = paper_run().recipe;
  recipe.total_duration_ns += 1.0;
  CHECK_THROWS_AS(recipe.validate(), ValidationError);
}

TEST_CASE("continuous conditional-phase control") {
  const DeviceSpec spec = test::paper_effective();
  CCPhaseMapOptions opts;
  opts.points = 17;
  opts.jobs = 2;

  const CCPhaseMap map = build_ccphase_map(spec, opts);

  SUBCASE("theta decreases monotonically with detuning") {
    for (size_t i = 1; i < map.theta_rad.size(); ++i) {
      CHECK(map.theta_rad[i] < map.theta_rad[i - 1]);
    }
  }

  SUBCASE("dispersive ends approach the trivial limits") {
    CHECK(map.theta_rad.front() > kPi);
    CHECK(map.theta_rad.back() < kPi);
    CHECK(map.p_return.front() > 0.98);
    CHECK(map.p_return.back() > 0.98);
  }

  SUBCASE("requested quarter-turn is realized") {
    CalibrationSettings settings;
    settings.working_point.jobs = 2;
    const CCPhaseResult result =
        ccphase(spec, kPi / 2.0, opts, settings);
    CHECK(std::abs(result.run.report.theta_measured_rad - kPi / 2.0) <= 0.03);
    CHECK(result.run.report.fidelity > 0.98);
    CHECK(result.run.report.theta_target_rad == doctest::Approx(kPi / 2.0));
  }

  SUBCASE("out-of-range theta is rejected") {
    CalibrationSettings settings;
    CHECK_THROWS_AS(ccphase(spec, 6.28, opts, settings), ValidationError);
    CHECK_THROWS_AS(ccphase(spec, 0.01, opts, settings), CalibrationError);
  }
}
