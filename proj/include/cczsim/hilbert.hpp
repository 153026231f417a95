#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cczsim/common.hpp"

namespace cczsim {

// One bosonic mode of the circuit, truncated to `levels` Fock states.
// Frequencies are lab-frame omega/2pi in GHz; anharmonicity is negative
// for transmon-like modes.
struct ModeSpec {
  std::string label;
  double frequency_ghz = 0.0;
  double anharmonicity_ghz = 0.0;
  int levels = 3;
};

using BasisState = std::vector<int>;

enum class LadderKind { Lower, Raise, Number, XiPlus };

// Dense operator on the tensor-product space. The hermitian flag is a
// promise checked at 1e-12 (in rad/ns for Hamiltonians).
struct OperatorMatrix {
  Eigen::MatrixXcd mat;
  bool hermitian = false;

  Eigen::Index dim() const { return mat.rows(); }
};

double hermiticity_defect(const Eigen::MatrixXcd& m);
OperatorMatrix make_hermitian(Eigen::MatrixXcd m, double tol = 1e-12);

// Immutable truncated multi-mode Fock space with fixed mode order.
// Flat indices are mixed-radix, row-major over the declared order.
class ModeSpace {
 public:
  explicit ModeSpace(std::vector<ModeSpec> modes);

  int dim() const { return dim_; }
  int n_modes() const { return static_cast<int>(modes_.size()); }
  const std::vector<ModeSpec>& modes() const { return modes_; }
  const ModeSpec& mode(int i) const { return modes_.at(i); }

  // Throws ValidationError for unknown labels.
  int mode_index(std::string_view label) const;

  // Mixed-radix encode; throws DimensionError when an occupation is out of
  // range for its mode.
  int basis_index(std::span<const int> occupations) const;
  int basis_index(const BasisState& occupations) const {
    return basis_index(std::span<const int>(occupations));
  }
  BasisState occupations(int index) const;

  // Single-mode ladder operator embedded with identities on all other
  // modes. XiPlus is the bare |2><0| projector form (unit matrix element);
  // it requires levels >= 3 on the target mode.
  OperatorMatrix ladder(std::string_view mode_label, LadderKind kind) const;

  // <s_i| op |s_j> block in the given state order.
  OperatorMatrix project(const OperatorMatrix& op,
                         const std::vector<BasisState>& kept_states) const;

 private:
  std::vector<ModeSpec> modes_;
  std::vector<int> strides_;
  int dim_ = 1;
};

}  // namespace cczsim
