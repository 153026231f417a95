#include "cczsim/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

namespace cczsim {

namespace {

std::pair<std::string, std::string> norm_key(const std::string& a,
                                             const std::string& b) {
  return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

double DeviceSpec::coupling(const std::string& a, const std::string& b) const {
  const auto it = couplings_ghz.find(norm_key(a, b));
  return it == couplings_ghz.end() ? 0.0 : it->second;
}

bool DeviceSpec::has_coupling(const std::string& a, const std::string& b) const {
  return couplings_ghz.count(norm_key(a, b)) > 0;
}

void DeviceSpec::set_coupling(const std::string& a, const std::string& b,
                              double g) {
  couplings_ghz[norm_key(a, b)] = g;
}

std::vector<std::string> DeviceSpec::qubit_labels() const {
  std::vector<std::string> out;
  if (flavor == Flavor::Full) {
    for (size_t i = 0; i < modes.size(); i += 2) out.push_back(modes[i].label);
  } else {
    for (const auto& m : modes) out.push_back(m.label);
  }
  return out;
}

DeviceSpec DeviceSpec::effective(const std::vector<ModeSpec>& qubits,
                                 double g12_ghz, double g23_ghz,
                                 double g13_ghz) {
  if (qubits.size() != 3) throw ValidationError("effective flavor needs 3 qubits");
  DeviceSpec spec;
  spec.flavor = Flavor::Effective;
  spec.modes = qubits;
  spec.set_coupling(qubits[0].label, qubits[1].label, g12_ghz);
  spec.set_coupling(qubits[1].label, qubits[2].label, g23_ghz);
  if (g13_ghz != 0.0) spec.set_coupling(qubits[0].label, qubits[2].label, g13_ghz);
  return spec;
}

std::vector<ValidationIssue> DeviceSpec::validate() const {
  std::vector<ValidationIssue> issues;
  const auto add = [&](bool fatal, std::string msg) {
    issues.push_back({fatal, std::move(msg)});
  };

  if (flavor == Flavor::Effective) {
    if (modes.size() != 3) {
      add(true, "effective flavor requires exactly 3 qubit modes");
      return issues;
    }
  } else {
    if (modes.size() != 5) {
      add(true, "full flavor requires modes q1, c1, q2, c2, q3");
      return issues;
    }
  }

  const auto qubits = qubit_labels();
  for (const auto& m : modes) {
    const bool is_qubit =
        std::find(qubits.begin(), qubits.end(), m.label) != qubits.end();
    if (m.anharmonicity_ghz >= 0.0) {
      add(is_qubit, "mode " + m.label + " has non-negative anharmonicity");
    }
    if (is_qubit && m.levels < 3) {
      const bool is_q2 = m.label == qubits[1];
      add(is_q2, "qubit " + m.label + " has fewer than 3 levels" +
                     (is_q2 ? " (its |2> state carries the gate)"
                            : "; leakage analysis unavailable"));
    }
  }

  if (flavor == Flavor::Effective) {
    if (!has_coupling(qubits[0], qubits[1]) || !has_coupling(qubits[1], qubits[2])) {
      add(true, "effective flavor requires couplings g12 and g23");
    }
    for (const auto& [key, g] : couplings_ghz) {
      const bool known =
          std::find(qubits.begin(), qubits.end(), key.first) != qubits.end() &&
          std::find(qubits.begin(), qubits.end(), key.second) != qubits.end();
      if (!known) add(true, "unknown coupling " + key.first + "-" + key.second);
      (void)g;
    }
  } else {
    const std::vector<std::pair<std::string, std::string>> required = {
        {modes[0].label, modes[1].label}, {modes[2].label, modes[1].label},
        {modes[2].label, modes[3].label}, {modes[4].label, modes[3].label},
        {modes[0].label, modes[2].label}, {modes[2].label, modes[4].label}};
    for (const auto& [a, b] : required) {
      if (!has_coupling(a, b)) {
        add(true, "full flavor missing coupling " + a + "-" + b +
                      " (zero must be explicit)");
      }
    }
  }

  // Dispersive sanity: every coupling small against its pair detuning.
  for (const auto& [key, g] : couplings_ghz) {
    if (g == 0.0) continue;
    double wa = 0.0, wb = 0.0;
    for (const auto& m : modes) {
      if (m.label == key.first) wa = m.frequency_ghz;
      if (m.label == key.second) wb = m.frequency_ghz;
    }
    const double det = std::abs(wa - wb);
    if (det <= 0.0) {
      add(true, "coupling " + key.first + "-" + key.second +
                    " has zero idle detuning");
      continue;
    }
    const double ratio = std::abs(g) / det;
    if (ratio >= 0.25) {
      add(true, "coupling " + key.first + "-" + key.second +
                    " not dispersive (|g|/delta = " + std::to_string(ratio) + ")");
    } else if (ratio > 0.1) {
      add(false, "coupling " + key.first + "-" + key.second +
                     " marginal dispersive ratio " + std::to_string(ratio));
    }
  }
  return issues;
}

namespace {

// Group a coupling into its pair-activation channel. Couplings that belong
// to neither channel (e.g. a residual q1-q3 term) stay unscaled.
std::optional<QubitPair> coupling_group(const DeviceSpec& spec,
                                        const std::string& a,
                                        const std::string& b) {
  const auto q = spec.qubit_labels();
  const auto is = [&](const std::string& x, const std::string& y) {
    return (a == x && b == y) || (a == y && b == x);
  };
  if (spec.flavor == Flavor::Effective) {
    if (is(q[0], q[1])) return QubitPair::Q1Q2;
    if (is(q[1], q[2])) return QubitPair::Q2Q3;
    return std::nullopt;
  }
  const std::string c1 = spec.modes[1].label, c2 = spec.modes[3].label;
  if (is(q[0], c1) || is(q[1], c1) || is(q[0], q[1])) return QubitPair::Q1Q2;
  if (is(q[1], c2) || is(q[2], c2) || is(q[1], q[2])) return QubitPair::Q2Q3;
  return std::nullopt;
}

double scale_for(const PairScales& scales, std::optional<QubitPair> group) {
  if (!group) return 1.0;
  const auto it = scales.find(*group);
  return it == scales.end() ? 1.0 : it->second;
}

Eigen::MatrixXcd coupling_term(const ModeSpace& space, Flavor flavor,
                               const std::string& a, const std::string& b) {
  const Eigen::MatrixXcd la = space.ladder(a, LadderKind::Lower).mat;
  const Eigen::MatrixXcd lb = space.ladder(b, LadderKind::Lower).mat;
  if (flavor == Flavor::Full) {
    // (a - a+)(b - b+)
    const Eigen::MatrixXcd da = la - la.adjoint();
    const Eigen::MatrixXcd db = lb - lb.adjoint();
    return da * db;
  }
  // a+ b + a b+
  return la.adjoint() * lb + la * lb.adjoint();
}

Eigen::VectorXd diagonal_energies_ghz(const ModeSpace& space,
                                      const Eigen::VectorXd& freqs_ghz) {
  const int dim = space.dim();
  Eigen::VectorXd diag(dim);
  for (int i = 0; i < dim; ++i) {
    const auto occ = space.occupations(i);
    double e = 0.0;
    for (int m = 0; m < space.n_modes(); ++m) {
      const double n = occ[m];
      e += freqs_ghz[m] * n +
           0.5 * space.mode(m).anharmonicity_ghz * n * (n - 1.0);
    }
    diag[i] = e;
  }
  return diag;
}

Eigen::VectorXd offsets_vector(const ModeSpace& space,
                               const FrequencyOffsets& offsets) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(space.n_modes());
  for (const auto& [label, dw] : offsets) {
    v[space.mode_index(label)] = dw;  // throws for unknown modes
  }
  return v;
}

OperatorMatrix build_impl(const DeviceSpec& spec, const FrequencyOffsets& offsets,
                          const PairScales& scales) {
  const ModeSpace space = spec.space();
  Eigen::VectorXd freqs(space.n_modes());
  for (int m = 0; m < space.n_modes(); ++m) {
    freqs[m] = space.mode(m).frequency_ghz;
  }
  freqs += offsets_vector(space, offsets);

  Eigen::MatrixXcd h = diagonal_energies_ghz(space, freqs).cast<complexd>().asDiagonal();
  for (const auto& [key, g] : spec.couplings_ghz) {
    if (g == 0.0) continue;
    const double s = scale_for(scales, coupling_group(spec, key.first, key.second));
    if (s == 0.0) continue;
    h += (s * g) * coupling_term(space, spec.flavor, key.first, key.second);
  }
  h *= kTwoPi;  // GHz -> rad/ns
  return make_hermitian(std::move(h));
}

}  // namespace

OperatorMatrix build_full(const DeviceSpec& spec, const FrequencyOffsets& offsets,
                          const PairScales& scales) {
  if (spec.flavor != Flavor::Full) {
    throw ValidationError("build_full requires a full-flavor device");
  }
  return build_impl(spec, offsets, scales);
}

OperatorMatrix build_effective(const DeviceSpec& spec,
                               const FrequencyOffsets& offsets,
                               const PairScales& scales) {
  if (spec.flavor != Flavor::Effective) {
    throw ValidationError("build_effective requires an effective-flavor device");
  }
  return build_impl(spec, offsets, scales);
}

OperatorMatrix build_hamiltonian(const DeviceSpec& spec,
                                 const FrequencyOffsets& offsets,
                                 const PairScales& scales) {
  return build_impl(spec, offsets, scales);
}

DeviceSpec DeviceSpec::with_pair_scale(QubitPair pair, double scale) const {
  DeviceSpec out = *this;
  for (auto& [key, g] : out.couplings_ghz) {
    if (coupling_group(*this, key.first, key.second) == pair) g *= scale;
  }
  return out;
}

DeviceSpec DeviceSpec::with_all_couplings_scaled(double factor) const {
  DeviceSpec out = *this;
  for (auto& [key, g] : out.couplings_ghz) g *= factor;
  return out;
}

double effective_coupling(double g_qc1_ghz, double g_qc2_ghz, double g_qq_ghz,
                          double wq1_ghz, double wq2_ghz, double wc_ghz) {
  const double d1 = wq1_ghz - wc_ghz;
  const double d2 = wq2_ghz - wc_ghz;
  const double s1 = wq1_ghz + wc_ghz;
  const double s2 = wq2_ghz + wc_ghz;
  constexpr double eps = 1e-9;
  if (std::abs(d1) < eps || std::abs(d2) < eps || std::abs(s1) < eps ||
      std::abs(s2) < eps) {
    throw SingularityError("qubit-coupler detuning vanishes");
  }
  return g_qq_ghz +
         0.5 * g_qc1_ghz * g_qc2_ghz * (1.0 / d1 + 1.0 / d2 - 1.0 / s1 - 1.0 / s2);
}

double zero_coupling_frequency(const DeviceSpec& full, QubitPair pair,
                               double wc_min_ghz, double wc_max_ghz) {
  if (full.flavor != Flavor::Full) {
    throw ValidationError("zero_coupling_frequency requires the full flavor");
  }
  const auto q = full.qubit_labels();
  const std::string qa = pair == QubitPair::Q1Q2 ? q[0] : q[1];
  const std::string qb = pair == QubitPair::Q1Q2 ? q[1] : q[2];
  const std::string c = pair == QubitPair::Q1Q2 ? full.modes[1].label
                                                : full.modes[3].label;
  double wa = 0.0, wb = 0.0;
  for (const auto& m : full.modes) {
    if (m.label == qa) wa = m.frequency_ghz;
    if (m.label == qb) wb = m.frequency_ghz;
  }
  const double gqa = full.coupling(qa, c);
  const double gqb = full.coupling(qb, c);
  const double gqq = full.coupling(qa, qb);
  const auto f = [&](double wc) {
    return effective_coupling(gqa, gqb, gqq, wa, wb, wc);
  };
  double lo = wc_min_ghz, hi = wc_max_ghz;
  double flo = f(lo), fhi = f(hi);
  if (flo * fhi > 0.0) {
    throw CalibrationError("no zero-coupling point in bracket");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
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

struct EffectiveParams {
  double w1, w2, w3, a2, g12, g23, g13;
};

EffectiveParams effective_params(const DeviceSpec& spec,
                                 const FrequencyOffsets& offsets) {
  if (spec.flavor != Flavor::Effective) {
    throw ValidationError("operation requires the effective flavor");
  }
  const ModeSpace space = spec.space();
  const Eigen::VectorXd dw = offsets_vector(space, offsets);
  const auto q = spec.qubit_labels();
  return EffectiveParams{
      spec.modes[0].frequency_ghz + dw[0], spec.modes[1].frequency_ghz + dw[1],
      spec.modes[2].frequency_ghz + dw[2], spec.modes[1].anharmonicity_ghz,
      spec.coupling(q[0], q[1]), spec.coupling(q[1], q[2]),
      spec.coupling(q[0], q[2])};
}

}  // namespace

double two_photon_J(const DeviceSpec& effective_spec,
                    const FrequencyOffsets& offsets) {
  const auto p = effective_params(effective_spec, offsets);
  const double w2p = p.w2 + p.a2;
  constexpr double eps = 1e-9;
  if (std::abs(w2p - p.w1) < eps || std::abs(w2p - p.w3) < eps) {
    throw SingularityError("two-photon intermediate detuning vanishes");
  }
  const double k12 = p.g12, k32 = p.g23;
  const double k12p = std::sqrt(2.0) * p.g12, k32p = std::sqrt(2.0) * p.g23;
  return k32 * k12p / (w2p - p.w1) + k12 * k32p / (w2p - p.w3);
}

TwoLevelModel project_101_020(const DeviceSpec& effective_spec,
                              const FrequencyOffsets& offsets) {
  const auto p = effective_params(effective_spec, offsets);
  if (effective_spec.modes[1].levels < 3) {
    throw ValidationError("|020> needs 3 levels on the middle qubit");
  }
  const double e101 = p.w1 + p.w3;
  const double e020 = 2.0 * p.w2 + p.a2;
  const double e011 = p.w2 + p.w3;
  const double e110 = p.w1 + p.w2;

  // Couplings of the kept states to the single-photon intermediates.
  const double v101_011 = p.g12, v101_110 = p.g23;
  const double v020_011 = std::sqrt(2.0) * p.g23;
  const double v020_110 = std::sqrt(2.0) * p.g12;

  const auto sym = [](double ea, double eb, double em) {
    return 0.5 * (1.0 / (ea - em) + 1.0 / (eb - em));
  };
  const double j = v101_011 * v020_011 * sym(e101, e020, e011) +
                   v101_110 * v020_110 * sym(e101, e020, e110);

  double s101 = v101_011 * v101_011 / (e101 - e011) +
                v101_110 * v101_110 / (e101 - e110);
  const double s020 = v020_011 * v020_011 / (e020 - e011) +
                      v020_110 * v020_110 / (e020 - e110);
  if (p.g13 != 0.0) {
    // a residual direct q1-q3 term shifts |101> via |200> and |002>
    const double e200 = 2.0 * p.w1 + effective_spec.modes[0].anharmonicity_ghz;
    const double e002 = 2.0 * p.w3 + effective_spec.modes[2].anharmonicity_ghz;
    const double v = std::sqrt(2.0) * p.g13;
    s101 += v * v / (e101 - e200) + v * v / (e101 - e002);
  }
  return TwoLevelModel{e101 + s101, e020 + s020, j};
}

Eigen::Matrix2cd TwoLevelModel::matrix_angular() const {
  Eigen::Matrix2cd m;
  m << ghz_to_angular(e101_ghz), ghz_to_angular(j_ghz), ghz_to_angular(j_ghz),
      ghz_to_angular(e020_ghz);
  return m;
}

namespace {

// Eigenenergies (GHz) assigned to the requested full-space basis indices by
// maximal overlap; throws DegeneracyError below 0.5 overlap or on collision.
std::vector<double> assigned_energies(const Eigen::MatrixXcd& h_angular,
                                      const std::vector<int>& indices) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h_angular);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  const auto& vecs = solver.eigenvectors();
  const auto& vals = solver.eigenvalues();
  std::vector<double> out;
  std::vector<Eigen::Index> taken;
  out.reserve(indices.size());
  for (const int idx : indices) {
    Eigen::Index best = 0;
    double best_w = -1.0;
    for (Eigen::Index k = 0; k < vecs.cols(); ++k) {
      const double w = std::norm(vecs(idx, k));
      if (w > best_w) {
        best_w = w;
        best = k;
      }
    }
    if (best_w < 0.5) {
      throw DegeneracyError("state assignment ambiguous (overlap " +
                            std::to_string(best_w) + " < 0.5)");
    }
    if (std::find(taken.begin(), taken.end(), best) != taken.end()) {
      throw DegeneracyError("two labels claim the same dressed level");
    }
    taken.push_back(best);
    out.push_back(angular_to_ghz(vals[best]));
  }
  return out;
}

}  // namespace

std::map<BasisState, double> dressed_energies(
    const DeviceSpec& spec, const FrequencyOffsets& offsets,
    const PairScales& scales, const std::vector<BasisState>& labels) {
  const ModeSpace space = spec.space();
  const auto qubits = spec.qubit_labels();
  const OperatorMatrix h = build_impl(spec, offsets, scales);

  std::vector<int> indices;
  for (const auto& label : labels) {
    if (label.size() != qubits.size()) {
      throw DimensionError("label arity must match qubit count");
    }
    BasisState occ(space.n_modes(), 0);
    for (size_t k = 0; k < qubits.size(); ++k) {
      occ[space.mode_index(qubits[k])] = label[k];
    }
    indices.push_back(space.basis_index(occ));
  }
  const auto energies = assigned_energies(h.mat, indices);
  std::map<BasisState, double> out;
  for (size_t i = 0; i < labels.size(); ++i) out[labels[i]] = energies[i];
  return out;
}

namespace {

ZZCoefficients zz_from_energies(const std::map<BasisState, double>& e) {
  const auto g = [&](int a, int b, int c) { return e.at({a, b, c}); };
  ZZCoefficients zz;
  zz.zeta12_mhz = 1e3 * (g(1, 1, 0) - g(1, 0, 0) - g(0, 1, 0) + g(0, 0, 0));
  zz.zeta23_mhz = 1e3 * (g(0, 1, 1) - g(0, 1, 0) - g(0, 0, 1) + g(0, 0, 0));
  zz.zeta13_mhz = 1e3 * (g(1, 0, 1) - g(1, 0, 0) - g(0, 0, 1) + g(0, 0, 0));
  zz.zeta123_mhz =
      1e3 * (g(1, 1, 1) - g(1, 1, 0) - g(1, 0, 1) - g(0, 1, 1) + g(1, 0, 0) +
             g(0, 1, 0) + g(0, 0, 1) - g(0, 0, 0));
  return zz;
}

std::vector<BasisState> computational_labels() {
  std::vector<BasisState> labels;
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b)
      for (int c = 0; c <= 1; ++c) labels.push_back({a, b, c});
  return labels;
}

}  // namespace

ZZCoefficients zz_coefficients(const DeviceSpec& spec,
                               const FrequencyOffsets& offsets,
                               const PairScales& scales) {
  return zz_from_energies(dressed_energies(spec, offsets, scales,
                                           computational_labels()));
}

ZZCoefficients zz_background(const DeviceSpec& effective_spec,
                             const FrequencyOffsets& offsets) {
  if (effective_spec.flavor != Flavor::Effective) {
    throw ValidationError("zz_background requires the effective flavor");
  }
  const ModeSpace space = effective_spec.space();
  const OperatorMatrix h = build_impl(effective_spec, offsets, {});
  const int excluded = space.basis_index(BasisState{0, 2, 0});

  // Drop the |020> row/column so the two-photon resonance cannot mix into
  // the |101> assignment; what remains is the dispersive background.
  const int dim = space.dim();
  std::vector<int> keep;
  keep.reserve(dim - 1);
  for (int i = 0; i < dim; ++i) {
    if (i != excluded) keep.push_back(i);
  }
  Eigen::MatrixXcd reduced(dim - 1, dim - 1);
  for (size_t r = 0; r < keep.size(); ++r)
    for (size_t c = 0; c < keep.size(); ++c)
      reduced(r, c) = h.mat(keep[r], keep[c]);

  std::vector<int> indices;
  for (const auto& label : computational_labels()) {
    const int full_idx = space.basis_index(label);
    const auto pos = std::lower_bound(keep.begin(), keep.end(), full_idx);
    indices.push_back(static_cast<int>(pos - keep.begin()));
  }
  const auto energies = assigned_energies(reduced, indices);
  std::map<BasisState, double> e;
  const auto labels = computational_labels();
  for (size_t i = 0; i < labels.size(); ++i) e[labels[i]] = energies[i];
  return zz_from_energies(e);
}

DeviceSpec effective_from_full(const DeviceSpec& full) {
  if (full.flavor != Flavor::Full) {
    throw ValidationError("effective_from_full requires the full flavor");
  }
  const auto q = full.qubit_labels();
  const std::string c1 = full.modes[1].label, c2 = full.modes[3].label;

  // Dress each qubit by its adjacent coupler(s) alone.
  const auto dressed = [&](int qubit_pos,
                           const std::vector<int>& coupler_pos) {
    DeviceSpec sub;
    sub.flavor = Flavor::Full;
    ModeSpec qm = full.modes[qubit_pos];
    if (qm.levels < 3) qm.levels = 3;  // need the |2> level for anharmonicity
    sub.modes.push_back(qm);
    for (const int cp : coupler_pos) sub.modes.push_back(full.modes[cp]);
    for (const int cp : coupler_pos) {
      sub.set_coupling(qm.label, full.modes[cp].label,
                       full.coupling(full.modes[qubit_pos].label,
                                     full.modes[cp].label));
    }
    const ModeSpace space = sub.space();
    const OperatorMatrix h = build_impl(sub, {}, {});
    std::vector<int> indices;
    for (int n = 0; n <= 2; ++n) {
      BasisState occ(space.n_modes(), 0);
      occ[0] = n;
      indices.push_back(space.basis_index(occ));
    }
    const auto e = assigned_energies(h.mat, indices);
    return std::pair<double, double>{e[1] - e[0], e[2] - 2.0 * e[1] + e[0]};
  };

  const auto [w1, a1] = dressed(0, {1});
  const auto [w2, a2] = dressed(2, {1, 3});
  const auto [w3, a3] = dressed(4, {3});

  const double g12 = effective_coupling(
      full.coupling(q[0], c1), full.coupling(q[1], c1), full.coupling(q[0], q[1]),
      full.modes[0].frequency_ghz, full.modes[2].frequency_ghz,
      full.modes[1].frequency_ghz);
  const double g23 = effective_coupling(
      full.coupling(q[1], c2), full.coupling(q[2], c2), full.coupling(q[1], q[2]),
      full.modes[2].frequency_ghz, full.modes[4].frequency_ghz,
      full.modes[3].frequency_ghz);

  std::vector<ModeSpec> qubits = {full.modes[0], full.modes[2], full.modes[4]};
  qubits[0].frequency_ghz = w1;
  qubits[0].anharmonicity_ghz = a1;
  qubits[1].frequency_ghz = w2;
  qubits[1].anharmonicity_ghz = a2;
  qubits[2].frequency_ghz = w3;
  qubits[2].anharmonicity_ghz = a3;
  for (auto& m : qubits) {
    if (m.levels < 3) m.levels = 3;
  }
  return DeviceSpec::effective(qubits, g12, g23);
}

}  // namespace cczsim
