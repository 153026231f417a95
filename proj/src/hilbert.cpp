#include "cczsim/hilbert.hpp"

#include <algorithm>
#include <set>

namespace cczsim {

std::vector<double> unwrap_phases(const std::vector<double>& wrapped) {
  std::vector<double> out(wrapped.size());
  if (wrapped.empty()) return out;
  out[0] = wrapped[0];
  for (size_t i = 1; i < wrapped.size(); ++i) {
    out[i] = out[i - 1] + wrap_angle(wrapped[i] - out[i - 1]);
  }
  return out;
}

double hermiticity_defect(const Eigen::MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

OperatorMatrix make_hermitian(Eigen::MatrixXcd m, double tol) {
  const double defect = hermiticity_defect(m);
  if (defect > tol) {
    throw ValidationError("operator violates hermiticity promise, defect = " +
                          std::to_string(defect));
  }
  return OperatorMatrix{std::move(m), true};
}

ModeSpace::ModeSpace(std::vector<ModeSpec> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) throw ValidationError("mode list is empty");
  strides_.assign(modes_.size(), 1);
  for (const auto& m : modes_) {
    if (m.levels < 2) {
      throw ValidationError("mode " + m.label + " needs at least 2 levels");
    }
  }
  for (int i = static_cast<int>(modes_.size()) - 2; i >= 0; --i) {
    strides_[i] = strides_[i + 1] * modes_[i + 1].levels;
  }
  for (const auto& m : modes_) dim_ *= m.levels;
}

int ModeSpace::mode_index(std::string_view label) const {
  for (size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i].label == label) return static_cast<int>(i);
  }
  throw ValidationError("unknown mode '" + std::string(label) + "'");
}

int ModeSpace::basis_index(std::span<const int> occupations) const {
  if (occupations.size() != modes_.size()) {
    throw DimensionError("occupation tuple has wrong arity");
  }
  int index = 0;
  for (size_t i = 0; i < modes_.size(); ++i) {
    const int n = occupations[i];
    if (n < 0 || n >= modes_[i].levels) {
      throw DimensionError("occupation " + std::to_string(n) +
                           " out of range for mode " + modes_[i].label);
    }
    index += n * strides_[i];
  }
  return index;
}

BasisState ModeSpace::occupations(int index) const {
  if (index < 0 || index >= dim_) {
    throw DimensionError("basis index out of range");
  }
  BasisState occ(modes_.size());
  for (size_t i = 0; i < modes_.size(); ++i) {
    occ[i] = (index / strides_[i]) % modes_[i].levels;
  }
  return occ;
}

namespace {

Eigen::MatrixXcd single_mode_matrix(LadderKind kind, int levels) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(levels, levels);
  switch (kind) {
    case LadderKind::Lower:
      for (int n = 1; n < levels; ++n) m(n - 1, n) = std::sqrt(double(n));
      break;
    case LadderKind::Raise:
      for (int n = 1; n < levels; ++n) m(n, n - 1) = std::sqrt(double(n));
      break;
    case LadderKind::Number:
      for (int n = 0; n < levels; ++n) m(n, n) = double(n);
      break;
    case LadderKind::XiPlus:
      m(2, 0) = 1.0;
      break;
  }
  return m;
}

}  // namespace

OperatorMatrix ModeSpace::ladder(std::string_view mode_label,
                                 LadderKind kind) const {
  const int target = mode_index(mode_label);
  const int levels = modes_[target].levels;
  if (kind == LadderKind::XiPlus && levels < 3) {
    throw ValidationError("xi_plus requires at least 3 levels on mode " +
                          modes_[target].label);
  }
  const Eigen::MatrixXcd local = single_mode_matrix(kind, levels);

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_, dim_);
  // Walk the full space once; the operator acts on one mixed-radix digit.
  for (int col = 0; col < dim_; ++col) {
    const int n = (col / strides_[target]) % levels;
    for (int m = 0; m < levels; ++m) {
      const complexd amp = local(m, n);
      if (amp == complexd(0.0, 0.0)) continue;
      const int row = col + (m - n) * strides_[target];
      out(row, col) = amp;
    }
  }
  return OperatorMatrix{std::move(out), kind == LadderKind::Number};
}

OperatorMatrix ModeSpace::project(
    const OperatorMatrix& op, const std::vector<BasisState>& kept_states) const {
  if (op.dim() != dim_) throw DimensionError("operator dimension mismatch");
  std::vector<int> idx;
  idx.reserve(kept_states.size());
  std::set<int> seen;
  for (const auto& s : kept_states) {
    const int i = basis_index(s);
    if (!seen.insert(i).second) {
      throw DimensionError("duplicate state in projection list");
    }
    idx.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXcd block(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) {
      block(r, c) = op.mat(idx[r], idx[c]);
    }
  }
  const bool herm = op.hermitian && hermiticity_defect(block) <= 1e-12;
  return OperatorMatrix{std::move(block), herm};
}

}  // namespace cczsim
