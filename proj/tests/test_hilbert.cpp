#include "test_common.hpp"

using namespace cczsim;

namespace {

ModeSpace three_by_three() {
  return ModeSpace({{"a", 5.0, -0.3, 3}, {"b", 5.1, -0.3, 3}, {"c", 4.9, -0.3, 3}});
}

}  // namespace

TEST_CASE("mixed-radix basis indexing") {
  const ModeSpace space = three_by_three();
  CHECK(space.dim() == 27);
  CHECK(space.basis_index({0, 0, 0}) == 0);
  CHECK(space.basis_index({1, 0, 1}) == 10);
  CHECK(space.basis_index({0, 2, 0}) == 6);

  for (int i = 0; i < space.dim(); ++i) {
    CHECK(space.basis_index(space.occupations(i)) == i);
  }

  CHECK_THROWS_AS(space.basis_index({3, 0, 0}), DimensionError);
  CHECK_THROWS_AS(space.basis_index({0, 0}), DimensionError);
  CHECK_THROWS_AS((void)space.occupations(27), DimensionError);
  CHECK_THROWS_AS((void)space.mode_index("nope"), ValidationError);
}

TEST_CASE("ladder operators carry the standard matrix elements") {
  const ModeSpace single({{"m", 5.0, -0.3, 3}});
  const Eigen::MatrixXcd lower = single.ladder("m", LadderKind::Lower).mat;
  CHECK(lower(0, 1) == complexd(1.0, 0.0));
  CHECK(std::abs(lower(1, 2) - std::sqrt(2.0)) < 1e-15);
  CHECK(test::max_abs(lower - lower.cwiseAbs()) == 0.0);

  const Eigen::MatrixXcd number = single.ladder("m", LadderKind::Number).mat;
  for (int n = 0; n < 3; ++n) CHECK(number(n, n) == complexd(n, 0.0));

  const Eigen::MatrixXcd raise = single.ladder("m", LadderKind::Raise).mat;
  CHECK(test::max_abs(raise - lower.adjoint()) < 1e-15);

  const Eigen::MatrixXcd xi = single.ladder("m", LadderKind::XiPlus).mat;
  CHECK(xi(2, 0) == complexd(1.0, 0.0));
  CHECK(xi.cwiseAbs().sum() == 1.0);

  const ModeSpace two_level({{"m", 5.0, -0.3, 2}});
  CHECK_THROWS_AS(two_level.ladder("m", LadderKind::XiPlus), ValidationError);
}

TEST_CASE("two-photon chain matrix elements") {
  const ModeSpace space = three_by_three();
  const int i101 = space.basis_index({1, 0, 1});
  const int i020 = space.basis_index({0, 2, 0});

  // Ladder-product form (a_b^+)^2 a_a a_c picks up the sqrt(2) of the
  // |1> -> |2> leg; this factor feeds the two-photon coupling.
  const Eigen::MatrixXcd raise_b = space.ladder("b", LadderKind::Raise).mat;
  const Eigen::MatrixXcd chain = raise_b * raise_b *
                                 space.ladder("a", LadderKind::Lower).mat *
                                 space.ladder("c", LadderKind::Lower).mat;
  CHECK(std::abs(chain(i020, i101) - std::sqrt(2.0)) < 1e-14);

  // The bare |2><0| projector form carries a unit element instead.
  const Eigen::MatrixXcd proj_chain = space.ladder("b", LadderKind::XiPlus).mat *
                                      space.ladder("a", LadderKind::Lower).mat *
                                      space.ladder("c", LadderKind::Lower).mat;
  CHECK(std::abs(proj_chain(i020, i101) - 1.0) < 1e-14);
}

TEST_CASE("commutator truncation sanity") {
  const ModeSpace single({{"m", 5.0, -0.3, 4}});
  const Eigen::MatrixXcd a = single.ladder("m", LadderKind::Lower).mat;
  const Eigen::MatrixXcd comm = a * a.adjoint() - a.adjoint() * a;
  // [a, a+] equals identity on all but the top truncated level
  for (int n = 0; n + 1 < 4; ++n) {
    CHECK(std::abs(comm(n, n) - 1.0) < 1e-15);
  }
}

TEST_CASE("projection blocks") {
  const ModeSpace space = three_by_three();
  OperatorMatrix identity{Eigen::MatrixXcd::Identity(27, 27), true};
  const auto block =
      space.project(identity, {BasisState{1, 0, 1}, BasisState{0, 2, 0}});
  CHECK(test::max_abs(block.mat - Eigen::MatrixXcd::Identity(2, 2)) == 0.0);
  CHECK(block.hermitian);

  CHECK_THROWS_AS(
      space.project(identity, {BasisState{1, 0, 1}, BasisState{1, 0, 1}}),
      DimensionError);

  // Three-body exchange form J a_a a_c Xi_b^+ + h.c. projected on the
  // resonant pair reproduces its off-diagonal coupling.
  const double j = 0.0037;
  const Eigen::MatrixXcd term =
      ghz_to_angular(j) * (space.ladder("a", LadderKind::Lower).mat *
                           space.ladder("c", LadderKind::Lower).mat *
                           space.ladder("b", LadderKind::XiPlus).mat);
  OperatorMatrix h = make_hermitian(term + term.adjoint());
  const auto pair =
      space.project(h, {BasisState{1, 0, 1}, BasisState{0, 2, 0}});
  CHECK(std::abs(pair.mat(0, 1) - complexd(ghz_to_angular(j), 0.0)) < 1e-12);
  CHECK(std::abs(pair.mat(0, 0)) < 1e-12);

  // Direct inner products agree with the projected block.
  Eigen::VectorXcd e101 = Eigen::VectorXcd::Zero(27);
  e101[space.basis_index({1, 0, 1})] = 1.0;
  Eigen::VectorXcd e020 = Eigen::VectorXcd::Zero(27);
  e020[space.basis_index({0, 2, 0})] = 1.0;
  CHECK(std::abs(pair.mat(1, 0) - e020.dot(h.mat * e101)) < 1e-14);
}

TEST_CASE("computational block of a leakage-free evolution is unitary") {
  const DeviceSpec spec = test::paper_effective();
  // Diagonal (coupling-free) evolution cannot leak.
  const DeviceSpec diag = spec.with_all_couplings_scaled(0.0);
  PulseSegment seg{"q2", -0.006, 2.0, 30.0, PulseShape::FlatTopCosine};
  const Eigen::MatrixXcd u =
      propagate_unitary(diag, PulseSchedule::single(seg, 0.01));
  const Eigen::MatrixXcd block = computational_block(u, diag);
  CHECK(test::unitarity_defect(block) < 1e-12);
}

TEST_CASE("hermitian flag is verified on construction") {
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
  bad(0, 1) = complexd(0.0, 1.0);
  bad(1, 0) = complexd(0.0, 1.0);  // not hermitian
  CHECK_THROWS_AS(make_hermitian(bad), ValidationError);
  bad(1, 0) = complexd(0.0, -1.0);
  CHECK(make_hermitian(bad).hermitian);
}
