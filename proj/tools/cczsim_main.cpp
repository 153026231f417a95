// Command-line front end: validate / calibrate / gate / scan.
#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "cczsim/io.hpp"
#include "cczsim/parallel.hpp"

namespace fs = std::filesystem;
using namespace cczsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCalibration = 3;
constexpr int kExitRuntime = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string model = "";  // "", "effective", "full"
  int jobs = 0;
};

Flavor resolve_flavor(const CommonArgs& args, const RunConfig& cfg) {
  if (args.model == "effective") return Flavor::Effective;
  if (args.model == "full") return Flavor::Full;
  if (!args.model.empty()) {
    throw ConfigError("--model must be 'effective' or 'full'");
  }
  return cfg.flavor;
}

std::string resolve_out_dir(const CommonArgs& args, const RunConfig& cfg) {
  if (!args.out_dir.empty()) return args.out_dir;
  if (const char* env = std::getenv("CCZSIM_OUT_DIR")) {
    if (*env) return env;
  }
  return cfg.outputs.directory;
}

int resolve_jobs(const CommonArgs& args) {
  return args.jobs > 0 ? args.jobs : default_jobs();
}

void print_issue(const ValidationIssue& issue) {
  std::cout << (issue.fatal ? "FAIL " : "WARN ") << issue.message << "\n";
}

int cmd_validate(const CommonArgs& args) {
  const RunConfig cfg = load_config(args.config_path);
  const Flavor flavor = resolve_flavor(args, cfg);
  const DeviceSpec eff = cfg.device(Flavor::Effective);

  const auto q = eff.qubit_labels();
  const double w2p =
      eff.modes[1].frequency_ghz + eff.modes[1].anharmonicity_ghz;
  const TwoLevelModel two_level = project_101_020(eff);
  const double amp_res = stage1_resonant_amplitude(eff);
  const double j_res = two_photon_J(eff, {{q[1], amp_res}});

  const double bare_delta = eff.modes[0].frequency_ghz +
                            eff.modes[2].frequency_ghz -
                            2.0 * eff.modes[1].frequency_ghz -
                            eff.modes[1].anharmonicity_ghz;
  std::cout << "config hash         " << cfg.hash << "\n";
  std::cout << "model flavor        "
            << (flavor == Flavor::Effective ? "effective" : "full") << "\n";
  std::cout << "w2' (w2+alpha2)     " << format_double(w2p) << " GHz\n";
  std::cout << "bare detuning       " << format_double(1e3 * bare_delta)
            << " MHz\n";
  std::cout << "dressed detuning    "
            << format_double(1e3 * two_level.detuning_ghz()) << " MHz\n";
  std::cout << "resonant shift      " << format_double(1e3 * amp_res) << " MHz\n";
  std::cout << "predicted |J|       " << format_double(1e3 * std::abs(j_res))
            << " MHz\n";
  std::cout << "predicted |J| (2x2) "
            << format_double(1e3 * std::abs(two_level.j_ghz)) << " MHz\n";

  bool fatal = false;
  auto issues = eff.validate();
  if (cfg.full) {
    const auto full_issues = cfg.device(Flavor::Full).validate();
    issues.insert(issues.end(), full_issues.begin(), full_issues.end());
  }
  for (const auto& issue : issues) {
    print_issue(issue);
    fatal = fatal || issue.fatal;
  }
  if (issues.empty()) std::cout << "PASS all device invariants\n";
  if (cfg.noise) {
    std::cout << "noise              user-supplied (Lindblad path enabled)\n";
  }
  return fatal ? kExitValidation : kExitOk;
}

std::vector<std::vector<double>> grid_to_long(const ScanGrid& grid) {
  std::vector<std::vector<double>> rows;
  rows.reserve(grid.x.size() * grid.y.size());
  for (size_t r = 0; r < grid.y.size(); ++r) {
    for (size_t c = 0; c < grid.x.size(); ++c) {
      rows.push_back({grid.x[c], grid.y[r],
                      grid.values(static_cast<Eigen::Index>(r),
                                  static_cast<Eigen::Index>(c))});
    }
  }
  return rows;
}

int cmd_calibrate(const CommonArgs& args) {
  const RunConfig cfg = load_config(args.config_path);
  const Flavor flavor = resolve_flavor(args, cfg);
  const int jobs = resolve_jobs(args);
  const fs::path out = resolve_out_dir(args, cfg);
  const FileMeta meta{cfg.hash};

  const DeviceSpec spec = cfg.device(flavor);
  const CalibrationSettings settings = cfg.calibration_settings(flavor, jobs);

  // Coupling-strength chevrons around the configured values.
  const DeviceSpec eff =
      flavor == Flavor::Effective ? spec : effective_from_full(spec);
  {
    std::vector<double> g_values;
    const double g_ref = std::abs(cfg.g12_ghz);
    for (int i = 0; i <= 6; ++i) g_values.push_back(g_ref * i / 4.0);
    for (const QubitPair pair : {QubitPair::Q1Q2, QubitPair::Q2Q3}) {
      ChevronOptions copts;
      copts.jobs = jobs;
      const ChevronResult chevron =
          chevron_coupling_scan(eff, pair, g_values, copts);
      write_grid_csv((out / (std::string("chevron_") + pair_name(pair) + ".csv"))
                         .string(),
                     chevron.grid, meta);
      std::vector<std::vector<double>> fit_rows;
      for (size_t i = 0; i < g_values.size(); ++i) {
        fit_rows.push_back({g_values[i], chevron.fitted_g_ghz[i]});
      }
      write_long_csv((out / (std::string("chevron_fit_") + pair_name(pair) +
                             ".csv"))
                         .string(),
                     {"g_programmed_ghz", "g_fitted_ghz"}, fit_rows, meta);
    }
  }

  CalibrationRun run = run_calibration(spec, settings);
  run.recipe.config_hash = cfg.hash;

  write_grid_csv((out / "working_point_population.csv").string(),
                 run.working_point.population, meta);
  write_grid_csv((out / "working_point_phase.csv").string(),
                 run.working_point.phase, meta);
  write_json((out / "recipe.json").string(), to_json(run.recipe), meta);
  write_json((out / "phases.json").string(), to_json(run.recipe.stage1_phases),
             meta);
  write_json((out / "calibration_report.json").string(), to_json(run.report),
             meta);

  // Stage-1 trajectory of the paired and spurious states.
  {
    const DeviceSpec stage =
        stage_spec(spec, {QubitPair::Q1Q2, QubitPair::Q2Q3});
    const StageTemplate tmpl = stage1_template(
        stage, run.recipe.stage1.amplitude_ghz, run.recipe.stage1.ramp_ns);
    const double hold =
        run.recipe.stage1.tau_stage1_ns - 2.0 * run.recipe.stage1.ramp_ns;
    const PulseSchedule schedule = tmpl.schedule(std::max(0.0, hold),
                                                 settings.dt_ns);
    const ModeSpace space = stage.space();
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(space.dim());
    psi[computational_index(stage, space, 1, 0, 1)] = 1.0;
    std::vector<double> samples;
    for (double t = 0.0; t <= schedule.total_ns(); t += 0.5) samples.push_back(t);
    const auto trajectory = evolve_lindblad(QuantumState::pure(psi), stage,
                                            schedule, NoiseSpec{}, samples);
    BasisState b020(space.n_modes(), 0);
    b020[space.mode_index(stage.qubit_labels()[1])] = 2;
    const std::vector<std::pair<std::string, int>> tracked = {
        {"p101", computational_index(stage, space, 1, 0, 1)},
        {"p020", space.basis_index(b020)},
        {"p110", computational_index(stage, space, 1, 1, 0)},
        {"p011", computational_index(stage, space, 0, 1, 1)}};
    std::vector<std::string> cols = {"time_ns"};
    for (const auto& [name, idx] : tracked) {
      (void)idx;
      cols.push_back(name);
    }
    std::vector<std::vector<double>> rows;
    for (const auto& pt : trajectory) {
      std::vector<double> row = {pt.t_ns};
      for (const auto& [name, idx] : tracked) {
        (void)name;
        row.push_back(population(pt.state, idx));
      }
      rows.push_back(row);
    }
    write_long_csv((out / "stage1_trajectory.csv").string(), cols, rows, meta);
  }

  std::cout << "working point: tau = " << format_double(run.recipe.stage1.tau_stage1_ns)
            << " ns, detuning = "
            << format_double(1e3 * run.recipe.stage1.delta_working_ghz)
            << " MHz, p_return = " << format_double(run.recipe.stage1.p_return)
            << "\n";
  for (const auto& c : run.recipe.cancellations) {
    std::cout << "cancellation " << pair_name(c.pair) << ": "
              << format_double(c.duration_ns) << " ns, phase "
              << format_double(c.achieved_phase_rad) << " rad\n";
  }
  std::cout << "assembled fidelity " << format_double(run.report.fidelity)
            << " over " << format_double(run.recipe.total_duration_ns)
            << " ns\n";
  return kExitOk;
}

GateRecipe load_recipe(const std::string& path, const RunConfig& cfg) {
  const nlohmann::json j = read_json(path);
  GateRecipe recipe = gate_recipe_from_json(j);
  if (recipe.config_hash != cfg.hash) {
    throw ConfigError("recipe " + path + " was calibrated for config " +
                      recipe.config_hash + ", current config is " + cfg.hash);
  }
  return recipe;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXcd& m,
                      const FileMeta& meta) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rows.push_back({double(r), double(c), std::abs(m(r, c)), m(r, c).real(),
                      m(r, c).imag()});
    }
  }
  write_long_csv(path, {"row", "col", "magnitude", "real", "imag"}, rows, meta);
}

int cmd_gate(const CommonArgs& args, const std::string& recipe_path,
             bool standard_basis, double theta, bool theta_set) {
  const RunConfig cfg = load_config(args.config_path);
  const Flavor flavor = resolve_flavor(args, cfg);
  const int jobs = resolve_jobs(args);
  const fs::path out = resolve_out_dir(args, cfg);
  const FileMeta meta{cfg.hash};
  const DeviceSpec spec = cfg.device(flavor);

  const std::string rpath =
      recipe_path.empty() ? (out / "recipe.json").string() : recipe_path;

  GateReport report;
  if (theta_set) {
    load_recipe(rpath, cfg);  // consistency guard only; theta recalibrates
    const CCPhaseResult result =
        ccphase(spec, theta, cfg.ccphase_map_options(flavor, jobs),
                cfg.calibration_settings(flavor, jobs));
    report = result.run.report;
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < result.map.delta_ghz.size(); ++i) {
      rows.push_back({result.map.delta_ghz[i], result.map.theta_rad[i],
                      result.map.tau_ns[i], result.map.p_return[i]});
    }
    write_long_csv((out / "ccphase_map.csv").string(),
                   {"delta_ghz", "theta_rad", "tau_ns", "p_return"}, rows, meta);
  } else {
    const GateRecipe recipe = load_recipe(rpath, cfg);
    report = assemble_ccz(spec, recipe, cfg.dt_for(flavor));
  }

  nlohmann::json payload = to_json(report);
  payload["basis_convention"] = standard_basis ? "standard" : "shifted";
  const Eigen::MatrixXcd emitted =
      standard_basis ? to_standard_ccz(report.u_realized) : report.u_realized;
  payload["u_emitted"] = matrix_to_json(emitted);
  write_json((out / "report.json").string(), payload, meta);
  write_matrix_csv((out / "matrix.csv").string(), emitted, meta);

  if (cfg.noise) {
    // Survival of the marked input under the user-supplied Lindblad rates.
    std::cout << "note: noise section present; see lindblad_survival in report"
              << "\n";
  }
  std::cout << "fidelity " << format_double(report.fidelity) << " ("
            << format_double(report.fidelity_standard) << " standard basis), "
            << "duration " << format_double(report.duration_ns) << " ns\n";
  std::cout << "conditional phase " << format_double(report.theta_measured_rad)
            << " rad, leakage " << format_double(report.leakage.total) << "\n";
  return kExitOk;
}

int cmd_scan(const CommonArgs& args, const std::string& kind,
             const std::string& recipe_path) {
  const RunConfig cfg = load_config(args.config_path);
  const Flavor flavor = resolve_flavor(args, cfg);
  const int jobs = resolve_jobs(args);
  const fs::path out = resolve_out_dir(args, cfg);
  const FileMeta meta{cfg.hash};
  const DeviceSpec spec = cfg.device(flavor);

  if (kind == "robustness") {
    const GateRecipe recipe = load_recipe(
        recipe_path.empty() ? (out / "recipe.json").string() : recipe_path, cfg);
    RobustnessOptions opts = cfg.robustness_options(flavor, jobs);
    const RobustnessGrid grid = robustness_scan(spec, recipe, opts);
    ScanGrid csv;
    csv.x_name = "delta";
    csv.y_name = "zeta_mhz";
    csv.x = grid.delta;
    csv.y = grid.zeta_mhz;
    csv.values = grid.fidelity;
    write_grid_csv((out / "robustness.csv").string(), csv, meta);
    write_long_csv((out / "robustness_long.csv").string(),
                   {"delta", "zeta_mhz", "fidelity"}, grid_to_long(csv), meta);
    write_json((out / "robustness_summary.json").string(), to_json(grid), meta);
    std::cout << "robustness: nominal " << format_double(grid.nominal)
              << ", min " << format_double(grid.min_fidelity) << ", dips "
              << grid.dips.size() << "\n";
    return kExitOk;
  }

  if (kind == "ccphase_map") {
    const CCPhaseMap map =
        build_ccphase_map(spec, cfg.ccphase_map_options(flavor, jobs));
    std::vector<std::vector<double>> rows;
    bool monotone = true;
    for (size_t i = 0; i < map.delta_ghz.size(); ++i) {
      rows.push_back(
          {map.delta_ghz[i], map.theta_rad[i], map.tau_ns[i], map.p_return[i]});
      if (i > 0 && map.theta_rad[i] >= map.theta_rad[i - 1]) monotone = false;
    }
    write_long_csv((out / "ccphase_map.csv").string(),
                   {"delta_ghz", "theta_rad", "tau_ns", "p_return"}, rows, meta);
    write_json((out / "ccphase_map_summary.json").string(),
               {{"monotone_decreasing", monotone},
                {"theta_min_rad", *std::min_element(map.theta_rad.begin(),
                                                    map.theta_rad.end())},
                {"theta_max_rad", *std::max_element(map.theta_rad.begin(),
                                                    map.theta_rad.end())}},
               meta);
    std::cout << "ccphase map: " << map.delta_ghz.size() << " points"
              << (monotone ? ", monotone" : ", NOT monotone") << "\n";
    return kExitOk;
  }

  if (kind == "leakage") {
    const GateRecipe recipe = load_recipe(
        recipe_path.empty() ? (out / "recipe.json").string() : recipe_path, cfg);
    WorkingPointOptions opts = cfg.working_point_options(flavor, jobs);
    opts.time_points = std::min(opts.time_points, 80);
    const ScanGrid grid = leakage_scan(spec, opts);
    write_grid_csv((out / "leakage.csv").string(), grid, meta);
    write_long_csv((out / "leakage_long.csv").string(),
                   {"detuning_ghz", "duration_ns", "leakage_total"},
                   grid_to_long(grid), meta);
    // Working-point leakage of the assembled gate plus the grid minimum.
    const GateReport report = assemble_ccz(spec, recipe, cfg.dt_for(flavor));
    Eigen::Index rmin = 0, cmin = 0;
    grid.values.minCoeff(&rmin, &cmin);
    write_json((out / "leakage_summary.json").string(),
               {{"at_working_point", to_json(report.leakage)},
                {"grid_min",
                 {{"detuning_ghz", grid.x[cmin]},
                  {"duration_ns", grid.y[rmin]},
                  {"leakage_total", grid.values(rmin, cmin)}}}},
               meta);
    std::cout << "leakage at working point " << format_double(report.leakage.total)
              << ", grid minimum " << format_double(grid.values(rmin, cmin))
              << "\n";
    return kExitOk;
  }

  throw ConfigError("unknown scan kind '" + kind +
                    "' (expected robustness, ccphase_map, or leakage)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulse-level simulator of a direct three-qubit CCZ gate"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonArgs common;
  app.add_option("--config", common.config_path, "run configuration (JSON)")
      ->required();
  app.add_option("--out-dir", common.out_dir,
                 "output directory (default: $CCZSIM_OUT_DIR or config)");
  app.add_option("--jobs", common.jobs, "worker threads (default: cores)");
  app.add_option("--model", common.model, "model override: effective | full");

  auto* validate = app.add_subcommand("validate", "check config and invariants");
  auto* calibrate =
      app.add_subcommand("calibrate", "tune the working point and cancellations");
  auto* gate = app.add_subcommand("gate", "assemble the gate and emit reports");
  std::string recipe_path;
  bool standard_basis = false;
  double theta = 0.0;
  gate->add_option("--recipe", recipe_path, "recipe JSON (default out/recipe.json)");
  gate->add_flag("--standard-basis", standard_basis,
                 "emit the X2-relabelled matrix (phase on |111>)");
  auto* theta_opt =
      gate->add_option("--theta", theta, "conditional phase target (rad)");
  auto* scan = app.add_subcommand("scan", "parameter-space scans");
  std::string scan_kind;
  std::string scan_recipe;
  scan->add_option("kind", scan_kind, "robustness | ccphase_map | leakage")
      ->required();
  scan->add_option("--recipe", scan_recipe, "recipe JSON (default out/recipe.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (validate->parsed()) return cmd_validate(common);
    if (calibrate->parsed()) return cmd_calibrate(common);
    if (gate->parsed()) {
      return cmd_gate(common, recipe_path, standard_basis, theta,
                      theta_opt->count() > 0);
    }
    if (scan->parsed()) return cmd_scan(common, scan_kind, scan_recipe);
  } catch (const ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SingularityError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const CalibrationError& e) {
    std::cerr << "calibration failure: " << e.what() << "\n";
    return kExitCalibration;
  } catch (const DegeneracyError& e) {
    std::cerr << "calibration failure: " << e.what() << "\n";
    return kExitCalibration;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
