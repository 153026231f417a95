#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cczsim/hilbert.hpp"

namespace cczsim {

enum class Flavor { Full, Effective };

enum class QubitPair { Q1Q2, Q2Q3 };

inline const char* pair_name(QubitPair p) {
  return p == QubitPair::Q1Q2 ? "q1q2" : "q2q3";
}

// Per-mode frequency shifts in GHz, keyed by mode label.
using FrequencyOffsets = std::map<std::string, double>;

// Multiplicative activation of a coupling group in [0, 1], keyed by pair.
using PairScales = std::map<QubitPair, double>;

struct ValidationIssue {
  bool fatal = false;
  std::string message;
};

// Static circuit description. Mode order is fixed: q1, c1, q2, c2, q3 for
// the full flavor and q1, q2, q3 for the effective flavor. Couplings are
// keyed by label pairs (order-insensitive) in GHz.
struct DeviceSpec {
  Flavor flavor = Flavor::Effective;
  std::vector<ModeSpec> modes;
  std::map<std::pair<std::string, std::string>, double> couplings_ghz;

  ModeSpace space() const { return ModeSpace(modes); }
  double coupling(const std::string& a, const std::string& b) const;
  bool has_coupling(const std::string& a, const std::string& b) const;
  void set_coupling(const std::string& a, const std::string& b, double g);

  std::vector<std::string> qubit_labels() const;
  std::vector<ValidationIssue> validate() const;

  // Returns a copy with the couplings of the given pair group scaled.
  // For the effective flavor the group is the single exchange coupling;
  // for the full flavor it is the pair's coupler links plus its direct
  // qubit-qubit coupling.
  DeviceSpec with_pair_scale(QubitPair pair, double scale) const;
  DeviceSpec with_all_couplings_scaled(double factor) const;

  static DeviceSpec effective(const std::vector<ModeSpec>& qubits,
                              double g12_ghz, double g23_ghz,
                              double g13_ghz = 0.0);
};

// H = sum_i (w_i + dw_i) n_i + (alpha_i/2) a+ a+ a a
//     + sum_ij g_ij (a_i - a_i+)(a_j - a_j+),   in rad/ns.
OperatorMatrix build_full(const DeviceSpec& spec,
                          const FrequencyOffsets& offsets = {},
                          const PairScales& scales = {});

// Excitation-conserving reduced model:
// H = sum_i (w_i + dw_i) n_i + (alpha_i/2) a+ a+ a a
//     + g12 (a1+ a2 + h.c.) + g23 (a2+ a3 + h.c.) [+ g13 term], in rad/ns.
OperatorMatrix build_effective(const DeviceSpec& spec,
                               const FrequencyOffsets& offsets = {},
                               const PairScales& scales = {});

// Dispatch on flavor.
OperatorMatrix build_hamiltonian(const DeviceSpec& spec,
                                 const FrequencyOffsets& offsets = {},
                                 const PairScales& scales = {});

// Second-order net qubit-qubit coupling through a tunable coupler:
// g~ = g_qq + (g_qc1 g_qc2 / 2)(1/D1 + 1/D2 - 1/S1 - 1/S2),
// D_k = w_qk - w_c, S_k = w_qk + w_c. All GHz. Throws SingularityError
// when a detuning vanishes.
double effective_coupling(double g_qc1_ghz, double g_qc2_ghz, double g_qq_ghz,
                          double wq1_ghz, double wq2_ghz, double wc_ghz);

// Coupler frequency nulling the net coupling for one pair of the full
// model, searched above the qubit band. Throws CalibrationError when no
// sign change exists in the bracket.
double zero_coupling_frequency(const DeviceSpec& full, QubitPair pair,
                               double wc_min_ghz, double wc_max_ghz);

// Two-photon |101> <-> |020> coupling, GHz:
// J = k32 k12' / (w2' - w1) + k12 k32' / (w2' - w3), w2' = w2 + alpha2,
// k12 = g12, k32 = g23, k12' = sqrt(2) g12, k32' = sqrt(2) g23.
double two_photon_J(const DeviceSpec& effective_spec,
                    const FrequencyOffsets& offsets = {});

// Two-level reduction onto {|101>, |020>} including the second-order
// diagonal shifts from the |011>, |110> intermediates. GHz.
struct TwoLevelModel {
  double e101_ghz = 0.0;   // dressed diagonal of |101>
  double e020_ghz = 0.0;   // dressed diagonal of |020>
  double j_ghz = 0.0;      // off-diagonal coupling
  double detuning_ghz() const { return e101_ghz - e020_ghz; }
  Eigen::Matrix2cd matrix_angular() const;
};
TwoLevelModel project_101_020(const DeviceSpec& effective_spec,
                              const FrequencyOffsets& offsets = {});

struct ZZCoefficients {
  double zeta12_mhz = 0.0;
  double zeta23_mhz = 0.0;
  double zeta13_mhz = 0.0;
  double zeta123_mhz = 0.0;
};

// Pairwise and three-body static phase-accumulation rates from exact
// diagonalization with maximal-overlap state assignment. Throws
// DegeneracyError when an assignment overlap drops below 0.5.
ZZCoefficients zz_coefficients(const DeviceSpec& spec,
                               const FrequencyOffsets& offsets = {},
                               const PairScales& scales = {});

// Like zz_coefficients but with the |020> row/column removed, isolating
// the dispersive background from the resonant two-photon exchange.
// Only meaningful for 3-qubit effective specs.
ZZCoefficients zz_background(const DeviceSpec& effective_spec,
                             const FrequencyOffsets& offsets = {});

// Dressed eigenenergies labelled by computational-basis max overlap.
// Keys are occupation tuples of the qubit modes only (couplers traced at
// ground). Values in GHz.
std::map<BasisState, double> dressed_energies(const DeviceSpec& spec,
                                              const FrequencyOffsets& offsets,
                                              const PairScales& scales,
                                              const std::vector<BasisState>& labels);

// Reduction of the full five-mode device to an equivalent three-qubit
// effective spec: qubit frequencies/anharmonicities are dressed by their
// adjacent couplers (subsystem diagonalization), couplings via
// effective_coupling.
DeviceSpec effective_from_full(const DeviceSpec& full);

}  // namespace cczsim
