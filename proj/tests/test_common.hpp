#pragma once

#include <doctest.h>

#include "cczsim/gates.hpp"

namespace cczsim::test {

// Appendix-style reference device used throughout the tests.
inline DeviceSpec paper_effective() {
  return DeviceSpec::effective({{"q1", 5.018, -0.35, 3},
                                {"q2", 5.18, -0.35, 3},
                                {"q3", 4.98, -0.35, 3}},
                               0.015, 0.015);
}

// Synthetic-coupler companion of the same device.
inline DeviceSpec paper_full() {
  DeviceSpec spec;
  spec.flavor = Flavor::Full;
  spec.modes = {{"q1", 5.018, -0.35, 3},
                {"c1", 6.4, -0.2, 2},
                {"q2", 5.18, -0.35, 3},
                {"c2", 6.3, -0.2, 2},
                {"q3", 4.98, -0.35, 3}};
  spec.set_coupling("q1", "c1", 0.11);
  spec.set_coupling("q2", "c1", 0.11);
  spec.set_coupling("q2", "c2", 0.11);
  spec.set_coupling("q3", "c2", 0.11);
  spec.set_coupling("q1", "q2", 0.02538904748175668);
  spec.set_coupling("q2", "q3", 0.0260484700496701);
  return spec;
}

inline double max_abs(const Eigen::MatrixXcd& m) {
  return m.cwiseAbs().maxCoeff();
}

inline double unitarity_defect(const Eigen::MatrixXcd& u) {
  return max_abs(u.adjoint() * u -
                 Eigen::MatrixXcd::Identity(u.rows(), u.cols()));
}

}  // namespace cczsim::test
