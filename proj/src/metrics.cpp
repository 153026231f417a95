#include "cczsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cczsim/gates.hpp"
#include "cczsim/parallel.hpp"

namespace cczsim {

double average_gate_fidelity(const Eigen::MatrixXcd& u_ideal,
                             const Eigen::MatrixXcd& u_real) {
  if (u_ideal.rows() != u_ideal.cols() || u_real.rows() != u_real.cols() ||
      u_ideal.rows() != u_real.rows()) {
    throw DimensionError("fidelity operands must be square and equal-sized");
  }
  const double d = static_cast<double>(u_ideal.rows());
  const complexd overlap = (u_ideal.adjoint() * u_real).trace();
  const double purity = (u_real.adjoint() * u_real).trace().real();
  return (std::norm(overlap) + purity) / (d * (d + 1.0));
}

namespace {

std::string pattern_key(const BasisState& bits) {
  std::string key;
  for (const int b : bits) key += static_cast<char>('0' + b);
  return key;
}

LeakageReport leakage_from_populations(const Eigen::VectorXd& populations,
                                       const DeviceSpec& spec,
                                       const std::vector<BasisState>& targets) {
  const ModeSpace space = spec.space();
  LeakageReport report;
  for (const auto& t : targets) {
    if (t.size() != 3) throw DimensionError("leakage targets are qubit patterns");
    const int idx = computational_index(spec, space, t[0], t[1], t[2]);
    const double p = populations[idx];
    report.per_state[pattern_key(t)] = p;
    report.total += p;
  }
  for (int i = 0; i < space.dim(); ++i) {
    const auto occ = space.occupations(i);
    if (std::any_of(occ.begin(), occ.end(), [](int n) { return n >= 2; })) {
      report.second_excited += populations[i];
    }
  }
  return report;
}

}  // namespace

LeakageReport leakage_from_state(const QuantumState& final_state,
                                 const DeviceSpec& spec,
                                 const std::vector<BasisState>& targets) {
  Eigen::VectorXd populations(final_state.dim());
  for (int i = 0; i < final_state.dim(); ++i) {
    populations[i] = population(final_state, i);
  }
  return leakage_from_populations(populations, spec, targets);
}

LeakageReport leakage_from_unitary(const Eigen::MatrixXcd& u_full,
                                   const DeviceSpec& spec,
                                   const BasisState& input,
                                   const std::vector<BasisState>& targets) {
  const ModeSpace space = spec.space();
  if (input.size() != 3) throw DimensionError("input is a qubit pattern");
  const int col = computational_index(spec, space, input[0], input[1], input[2]);
  const Eigen::VectorXd populations = u_full.col(col).cwiseAbs2();
  return leakage_from_populations(populations, spec, targets);
}

namespace {

// Closest approach (MHz) between any dressed level with computational
// character and the rest of the spectrum at the drifted stage-1 flat top;
// surfaced as a resonance candidate for fidelity dips.
double min_gap_candidate_mhz(const DeviceSpec& drifted_spec,
                             const GateRecipe& recipe, double zeta_ghz) {
  const DeviceSpec run_spec =
      stage_spec(drifted_spec, {QubitPair::Q1Q2, QubitPair::Q2Q3});
  const std::string q2 = run_spec.qubit_labels()[1];
  const double amp = recipe.stage1.amplitude_ghz - 0.5 * zeta_ghz;
  PairScales scales;
  if (run_spec.flavor == Flavor::Full) {
    scales[QubitPair::Q1Q2] = 1.0;
    scales[QubitPair::Q2Q3] = 1.0;
  }
  const OperatorMatrix h = build_hamiltonian(run_spec, {{q2, amp}}, scales);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.mat);
  const ModeSpace space = run_spec.space();
  const auto idx = computational_indices(run_spec, space);

  double min_gap = std::numeric_limits<double>::infinity();
  for (const int i : idx) {
    Eigen::Index best = 0;
    double best_w = -1.0;
    for (Eigen::Index k = 0; k < es.eigenvectors().cols(); ++k) {
      const double w = std::norm(es.eigenvectors()(i, k));
      if (w > best_w) {
        best_w = w;
        best = k;
      }
    }
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      if (k == best) continue;
      min_gap = std::min(
          min_gap, std::abs(es.eigenvalues()[k] - es.eigenvalues()[best]));
    }
  }
  return angular_to_ghz(min_gap) * 1e3;
}

}  // namespace

RobustnessGrid robustness_scan(const DeviceSpec& spec, const GateRecipe& recipe,
                               const RobustnessOptions& opts) {
  RobustnessGrid grid;
  grid.delta.resize(opts.delta_points);
  grid.zeta_mhz.resize(opts.zeta_points);
  for (int c = 0; c < opts.delta_points; ++c) {
    grid.delta[c] = opts.delta_points == 1
                        ? 0.0
                        : -opts.delta_span +
                              2.0 * opts.delta_span * c / (opts.delta_points - 1);
  }
  for (int r = 0; r < opts.zeta_points; ++r) {
    grid.zeta_mhz[r] = opts.zeta_points == 1
                           ? 0.0
                           : -opts.zeta_span_mhz + 2.0 * opts.zeta_span_mhz * r /
                                                       (opts.zeta_points - 1);
  }
  grid.fidelity.resize(opts.zeta_points, opts.delta_points);

  parallel_for(opts.zeta_points * opts.delta_points, opts.jobs, [&](int k) {
    const int r = k / opts.delta_points;
    const int c = k % opts.delta_points;
    DriftOverrides drift;
    drift.coupling_scale = 1.0 + grid.delta[c];
    drift.stage1_detuning_shift_ghz = grid.zeta_mhz[r] / 1e3;
    const GateReport report = assemble_ccz(spec, recipe, opts.dt_ns, drift);
    grid.fidelity(r, c) = report.fidelity;
  });

  grid.min_fidelity = grid.fidelity.minCoeff(&grid.argmin_row, &grid.argmin_col);
  // nominal = the grid point closest to (0, 0)
  int r0 = 0, c0 = 0;
  for (int r = 0; r < opts.zeta_points; ++r) {
    if (std::abs(grid.zeta_mhz[r]) < std::abs(grid.zeta_mhz[r0])) r0 = r;
  }
  for (int c = 0; c < opts.delta_points; ++c) {
    if (std::abs(grid.delta[c]) < std::abs(grid.delta[c0])) c0 = c;
  }
  grid.nominal = grid.fidelity(r0, c0);

  for (int r = 0; r < opts.zeta_points; ++r) {
    for (int c = 0; c < opts.delta_points; ++c) {
      double sum = 0.0;
      int count = 0;
      for (const auto& [dr, dc] : std::vector<std::pair<int, int>>{
               {-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        const int rr = r + dr, cc = c + dc;
        if (rr < 0 || rr >= opts.zeta_points || cc < 0 || cc >= opts.delta_points)
          continue;
        sum += grid.fidelity(rr, cc);
        ++count;
      }
      if (count == 0) continue;
      const double mean = sum / count;
      if (grid.fidelity(r, c) < mean - 0.03) {
        RobustnessGrid::Dip dip;
        dip.row = r;
        dip.col = c;
        dip.fidelity = grid.fidelity(r, c);
        dip.neighbor_mean = mean;
        dip.min_gap_mhz = min_gap_candidate_mhz(
            spec.with_all_couplings_scaled(1.0 + grid.delta[c]), recipe,
            grid.zeta_mhz[r] / 1e3);
        grid.dips.push_back(dip);
      }
    }
  }
  return grid;
}

ScanGrid leakage_scan(const DeviceSpec& spec, const WorkingPointOptions& opts) {
  const DeviceSpec run_spec =
      stage_spec(spec, {QubitPair::Q1Q2, QubitPair::Q2Q3});
  const double amp_res = stage1_resonant_amplitude(spec);
  const double tau_min = 2.0 * opts.ramp_ns;

  ScanGrid grid;
  grid.x_name = "detuning_ghz";
  grid.y_name = "duration_ns";
  grid.x.resize(opts.detuning_points);
  grid.y.resize(opts.time_points);
  std::vector<double> amps(opts.detuning_points);
  for (int c = 0; c < opts.detuning_points; ++c) {
    const double delta =
        -opts.detuning_span_ghz / 2.0 +
        opts.detuning_span_ghz * c / std::max(1, opts.detuning_points - 1);
    amps[c] = amp_res - delta / 2.0;
  }
  for (int r = 0; r < opts.time_points; ++r) {
    grid.y[r] = tau_min + (opts.time_max_ns - tau_min) * r /
                              std::max(1, opts.time_points - 1);
  }
  grid.values.resize(opts.time_points, opts.detuning_points);

  const ModeSpace space = run_spec.space();
  const int i101 = computational_index(run_spec, space, 1, 0, 1);
  const int i011 = computational_index(run_spec, space, 0, 1, 1);
  const int i110 = computational_index(run_spec, space, 1, 1, 0);

  parallel_for(opts.detuning_points, opts.jobs, [&](int c) {
    grid.x[c] = stage1_detuning(spec, amps[c]);
    const StageSolver solver(
        run_spec, stage1_template(run_spec, amps[c], opts.ramp_ns), opts.dt_ns);
    const StageColumnProbe probe(solver, i101);
    for (int r = 0; r < opts.time_points; ++r) {
      const Eigen::VectorXcd col = probe.at(grid.y[r] - tau_min);
      grid.values(r, c) = std::norm(col[i011]) + std::norm(col[i110]);
    }
  });
  return grid;
}

}  // namespace cczsim
