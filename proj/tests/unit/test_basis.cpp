#include <gtest/gtest.h>

#include <cmath>

#include <qmrom/basis.hpp>
#include <qmrom/errors.hpp>
#include <qmrom/scenarios.hpp>
#include <qmrom/vk_beam.hpp>

#include "toy_models.hpp"

using namespace qmrom;
using qmrom::testing::ToyModel;

namespace {

ReductionBasis columns_of(const Matrix& V) {
  ReductionBasis b;
  b.V = V;
  b.columns.assign(static_cast<std::size_t>(V.cols()), ColumnInfo{});
  return b;
}

// Distance of span(B) from span(A); zero when span(B) lies inside span(A).
double span_distance(const Matrix& A, const Matrix& B) {
  const Matrix Qa = Eigen::HouseholderQR<Matrix>(A).householderQ() * Matrix::Identity(A.rows(), A.cols());
  const Matrix Qb = Eigen::HouseholderQR<Matrix>(B).householderQ() * Matrix::Identity(B.rows(), B.cols());
  return (Qb - Qa * (Qa.transpose() * Qb)).norm();
}

const StructuralModel& desk_beam() {
  static const auto model = build_model(builtin_scenario("beam_cc_desk"));
  return *model;
}

}  // namespace

TEST(VibrationModes, ClampedBeamFrequencies) {
  const auto model = build_model(builtin_scenario("beam_cc"));
  const auto f = vibration_modes(*model, 3).frequencies_hz();
  ASSERT_EQ(f.size(), 3u);
  EXPECT_NEAR(f[0], 65.2, 0.005 * 65.2);
  EXPECT_NEAR(f[1], 178.8, 0.005 * 178.8);
  EXPECT_NEAR(f[2], 348.0, 0.005 * 348.0);
}

TEST(VibrationModes, CantileverFrequencies) {
  const auto model = build_model(builtin_scenario("cantilever"));
  const auto f = vibration_modes(*model, 2).frequencies_hz();
  EXPECT_NEAR(f[0], 10.3, 0.005 * 10.3);
  EXPECT_NEAR(f[1], 64.2, 0.005 * 64.2);
}

TEST(VibrationModes, DiagonalToyTaggedAscending) {
  Matrix K = Matrix::Zero(3, 3);
  K.diagonal() << 9, 1, 4;
  const ToyModel toy(K, Matrix::Identity(3, 3));
  const auto b = vibration_modes(toy, 3);
  ASSERT_EQ(b.columns.size(), 3u);
  EXPECT_EQ(b.columns[0].kind, ColumnKind::vibration_mode);
  EXPECT_NEAR(b.columns[0].omega, 1.0, 1e-14);
  EXPECT_NEAR(b.columns[1].omega, 2.0, 1e-14);
  EXPECT_NEAR(b.columns[2].omega, 3.0, 1e-14);
  EXPECT_NEAR(b.V(1, 0), 1.0, 1e-14);
}

TEST(KrylovModes, FirstVectorIsStaticSolution) {
  const auto& model = desk_beam();
  const auto b = krylov_modes(model, model.load_pattern(), 1);
  ASSERT_EQ(b.size(), 1);
  const SparseMatrix K = model.stiffness(Vector::Zero(model.dofs()));
  const Vector Kv = K * b.V.col(0);
  const Vector& F = model.load_pattern();
  const double c = Kv.dot(F) / F.squaredNorm();
  // normwise backward error; |K v| itself carries roundoff of order eps |K| |v|
  EXPECT_LE((Kv - c * F).norm(), 1e-10 * K.norm() * b.V.col(0).norm());
}

TEST(KrylovModes, ChainSpanMatchesMomentSequence) {
  Matrix K(3, 3), M = Matrix::Zero(3, 3);
  K << 2, -1, 0, -1, 2, -1, 0, -1, 1;
  M.diagonal() << 1, 2, 3;
  const ToyModel toy(K, M);
  Vector F(3);
  F << 0.0, 0.0, 1.0;
  const auto b = krylov_modes(toy, F, 3);
  ASSERT_EQ(b.size(), 3);
  // The sequence is computed here with dense inverses, independently of the Lanczos loop.
  const Matrix Kinv = K.inverse();
  Matrix seq(3, 2);
  seq.col(0) = Kinv * F;
  seq.col(1) = Kinv * M * seq.col(0);
  EXPECT_LE(span_distance(seq, b.V.leftCols(2)), 1e-8);
  EXPECT_LE((b.V.transpose() * M * b.V - Matrix::Identity(3, 3)).norm(), 1e-8);
}

TEST(KrylovModes, MassOrthonormalOnBeam) {
  const auto& model = desk_beam();
  const auto b = krylov_modes(model, model.load_pattern(), 10);
  ASSERT_EQ(b.size(), 10);
  const Matrix G = b.V.transpose() * (model.mass() * b.V);
  EXPECT_LE((G - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-8);
  for (const auto& c : b.columns) EXPECT_EQ(c.kind, ColumnKind::krylov);
}

TEST(KrylovModes, BreakdownReturnsAttainedSize) {
  const ToyModel toy = qmrom::testing::quadratic_toy();
  const auto b = krylov_modes(toy, Vector::Ones(2), 3);
  EXPECT_LT(b.size(), 3);
  EXPECT_FALSE(b.warnings.empty());
}

TEST(KrylovModes, RejectsZeroLoad) {
  const ToyModel toy = qmrom::testing::quadratic_toy();
  EXPECT_THROW(krylov_modes(toy, Vector::Zero(2), 2), InvalidArgument);
}

TEST(StiffnessDerivative, CubicToyClosedForm) {
  const double b = 0.7;
  const ToyModel toy = qmrom::testing::cubic_toy(b, 2.0);
  Vector v(2);
  v << 0.3, -1.2;
  const Matrix dK = stiffness_directional_derivative(toy, v);
  // tangent of the quadratic part is linear in u; the cubic part has zero slope at rest
  Matrix expected(2, 2);
  expected << 2 * b * v[0], b * v[1], b * v[1], b * v[0];
  EXPECT_LE((dK - expected).norm(), 1e-8 * expected.norm());
}

TEST(StiffnessDerivative, StepIndependentOnContinuum) {
  const auto& model = desk_beam();
  const Vector v = vibration_modes(model, 1).V.col(0);
  FiniteDifferenceOptions coarse, fine;
  fine.step_ratio = 0.5 * coarse.step_ratio;
  const SparseMatrix a = stiffness_directional_derivative(model, v, coarse);
  const SparseMatrix b = stiffness_directional_derivative(model, v, fine);
  EXPECT_LE(SparseMatrix(a - b).norm(), 1e-6 * a.norm());
  EXPECT_LE(SparseMatrix(a - SparseMatrix(a.transpose())).norm(), 1e-10 * a.norm());
}

TEST(StiffnessDerivative, VkAxialDirectionLeavesMembraneBlocks) {
  Material mat;
  const VkBeamModel beam = vk_beam_model(2.0, 0.05, 20, mat);
  Vector v = Vector::Zero(beam.dofs());
  for (Index d : beam.membrane_dofs()) v[d] = std::sin(static_cast<double>(d));
  const Matrix dK = stiffness_directional_derivative(beam, v);
  const double Knorm = beam.stiffness(Vector::Zero(beam.dofs())).norm();
  double mm = 0.0, mb = 0.0, bb = 0.0;
  for (Index r : beam.membrane_dofs()) {
    for (Index c : beam.membrane_dofs()) mm = std::max(mm, std::abs(dK(r, c)));
    for (Index c : beam.bending_dofs()) mb = std::max(mb, std::abs(dK(r, c)));
  }
  for (Index r : beam.bending_dofs())
    for (Index c : beam.bending_dofs()) bb = std::max(bb, std::abs(dK(r, c)));
  EXPECT_LE(mm, 1e-8 * Knorm);
  EXPECT_LE(mb, 1e-8 * Knorm);
  // the axial force stiffens bending: the bending block responds linearly
  EXPECT_GT(bb, 1e-6 * Knorm);
}

TEST(StiffnessDerivative, VkTransverseDirectionCouplingOnly) {
  Material mat;
  const VkBeamModel beam = vk_beam_model(2.0, 0.05, 20, mat);
  Vector v = Vector::Zero(beam.dofs());
  for (Index d : beam.bending_dofs()) v[d] = std::cos(0.3 * static_cast<double>(d));
  const Matrix dK = stiffness_directional_derivative(beam, v);
  const double Knorm = beam.stiffness(Vector::Zero(beam.dofs())).norm();
  double mm = 0.0, mb = 0.0, bb = 0.0;
  for (Index r : beam.membrane_dofs()) {
    for (Index c : beam.membrane_dofs()) mm = std::max(mm, std::abs(dK(r, c)));
    for (Index c : beam.bending_dofs()) mb = std::max(mb, std::abs(dK(r, c)));
  }
  for (Index r : beam.bending_dofs())
    for (Index c : beam.bending_dofs()) bb = std::max(bb, std::abs(dK(r, c)));
  EXPECT_LE(mm, 1e-8 * Knorm);
  EXPECT_LE(bb, 1e-8 * Knorm);
  EXPECT_GT(mb, 1e-6 * Knorm);
}

TEST(StiffnessDerivative, RejectsZeroDirection) {
  const ToyModel toy = qmrom::testing::quadratic_toy();
  EXPECT_THROW(stiffness_directional_derivative(toy, Vector::Zero(2)), InvalidArgument);
}

TEST(StaticDerivatives, QuadraticToyClosedForm) {
  const ToyModel toy = qmrom::testing::quadratic_toy();
  const QuadTensor theta = static_derivatives(toy, columns_of(Matrix::Identity(2, 1)));
  ASSERT_EQ(theta.packed().cols(), 1);
  EXPECT_NEAR(theta.column(0, 0)[0], -4.0 / 3.0, 1e-9);
  EXPECT_NEAR(theta.column(0, 0)[1], -2.0 / 3.0, 1e-9);
}

TEST(StaticDerivatives, LinearModelGivesZero) {
  Matrix K(2, 2);
  K << 2, -1, -1, 2;
  const ToyModel toy(K, Matrix::Identity(2, 2));
  const QuadTensor theta = static_derivatives(toy, columns_of(Matrix::Identity(2, 2)));
  EXPECT_EQ(theta.packed().cols(), 3);
  EXPECT_LE(theta.packed().norm(), 1e-12);
}

TEST(StaticDerivatives, MatchForceSecondDifference) {
  // For a cubic internal force the symmetric four-point stencil isolates the
  // quadratic part: its value over 4 h^2 is dK/dq_j v_i with no truncation error.
  const auto& model = desk_beam();
  const auto modes = vibration_modes(model, 3);
  const QuadTensor theta = static_derivatives(model, modes);
  const SpdFactor K0(model.stiffness(Vector::Zero(model.dofs())));
  for (Index i = 0; i < 3; ++i)
    for (Index j = i; j < 3; ++j) {
      const Vector a = modes.V.col(i), b = modes.V.col(j);
      const double h = 1e-2 / std::max((a + b).cwiseAbs().maxCoeff(), (a - b).cwiseAbs().maxCoeff());
      const Vector s = model.internal_force(h * (a + b)) - model.internal_force(h * (a - b)) -
                       model.internal_force(-h * (a - b)) + model.internal_force(-h * (a + b));
      const Vector expected = -K0.solve(Vector(s / (4.0 * h * h)));
      EXPECT_LE((theta.column(i, j) - expected).norm(), 1e-5 * expected.norm()) << i << "," << j;
    }
}

TEST(StaticDerivatives, BothSolveOrdersAgree) {
  const auto& model = desk_beam();
  const auto modes = vibration_modes(model, 4);
  // The tangent is exactly quadratic in u, so the central difference has no
  // truncation error and only roundoff (about 1e-11 / step_ratio) remains.
  FiniteDifferenceOptions options;
  options.step_ratio = 1e-2;
  const StaticDerivativeSolver solver(model, modes.V, options);
  for (Index i = 0; i < 4; ++i)
    for (Index j = i + 1; j < 4; ++j) {
      const Vector a = solver.derivative(i, j), b = solver.derivative(j, i);
      EXPECT_LE((a - b).norm(), 1e-8 * a.norm()) << i << "," << j;
    }
}

TEST(StaticDerivatives, ModalAliasMatches) {
  const auto& model = desk_beam();
  const auto modes = vibration_modes(model, 3);
  const QuadTensor a = static_derivatives(model, modes);
  const QuadTensor b = static_modal_derivatives(model, modes);
  EXPECT_LE((a.packed() - b.packed()).norm(), 1e-8 * a.packed().norm());
  EXPECT_THROW(static_modal_derivatives(model, columns_of(modes.V)), InvalidArgument);
}

namespace {

// Mode i of the tangent eigenproblem K(q) phi = lambda M phi at displacement q.
Vector mode_at(const ToyModel& toy, const Vector& q, Index i, const Vector& reference) {
  const auto ep = eig_gsym(Matrix(toy.stiffness(q)), Matrix(toy.mass()), toy.dofs());
  Vector phi = ep.vectors.col(i);
  if (phi.dot(toy.mass() * reference) < 0) phi = -phi;
  return phi;
}

void check_against_perturbed_eigenproblem(const ToyModel& toy) {
  const auto modes = vibration_modes(toy, 2);
  const ModalDerivativeSolver solver(toy, modes);
  const double eps = 1e-4;
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      const Vector phi = modes.V.col(i), vj = modes.V.col(j);
      const Vector fd = (mode_at(toy, eps * vj, i, phi) - mode_at(toy, -eps * vj, i, phi)) / (2 * eps);
      const Vector md = solver.derivative(i, j);
      EXPECT_LE((md - fd).norm(), 1e-6 * std::max(1.0, fd.norm())) << i << "," << j;
    }
}

}  // namespace

TEST(ModalDerivatives, PerturbedEigenproblemIdentityMass) {
  check_against_perturbed_eigenproblem(qmrom::testing::quadratic_toy());
}

TEST(ModalDerivatives, PerturbedEigenproblemGeneralMass) {
  check_against_perturbed_eigenproblem(qmrom::testing::cubic_toy(0.8, 0.5));
}

TEST(ModalDerivatives, TensorIsSymmetrizedAverage) {
  const ToyModel toy = qmrom::testing::cubic_toy();
  const auto modes = vibration_modes(toy, 2);
  const ModalDerivativeSolver solver(toy, modes);
  const QuadTensor theta = solver.tensor();
  const Vector avg = 0.5 * (solver.derivative(0, 1) + solver.derivative(1, 0));
  EXPECT_LE((theta.column(0, 1) - avg).norm(), 1e-14 * avg.norm());
  EXPECT_LE((theta.column(0, 0) - solver.derivative(0, 0)).norm(), 1e-14);
}

TEST(ModalDerivatives, LinearModelGivesZero) {
  Matrix K(2, 2);
  K << 2, -1, -1, 2;
  const ToyModel toy(K, Matrix::Identity(2, 2));
  EXPECT_LE(modal_derivatives(toy, vibration_modes(toy, 2)).packed().norm(), 1e-12);
}

TEST(ModalDerivatives, RepeatedEigenvaluesRejected) {
  Matrix K = Matrix::Identity(2, 2);
  const ToyModel toy(K, Matrix::Identity(2, 2));
  EXPECT_THROW(modal_derivatives(toy, vibration_modes(toy, 2)), DegenerateModeError);
}

TEST(ModalDerivatives, SolvabilityResidualOnBeam) {
  const auto& model = desk_beam();
  const auto modes = vibration_modes(model, 3);
  const SparseMatrix& M = model.mass();
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) {
      const Vector phi = modes.V.col(i);
      const Vector dKphi = stiffness_directional_derivative(model, modes.V.col(j)) * phi;
      const Vector rhs = -(dKphi - phi.dot(dKphi) * (M * phi));
      EXPECT_LE(std::abs(phi.dot(rhs)), 1e-8 * rhs.norm());
    }
  const QuadTensor theta = modal_derivatives(model, modes);
  EXPECT_TRUE(theta.packed().allFinite());
  EXPECT_GT(theta.packed().norm(), 0.0);
}

TEST(OrthogonalizeTheta, AlreadyOrthogonalUnchanged) {
  Matrix V = Matrix::Zero(4, 2);
  V(0, 0) = 1.0;
  V(1, 1) = 1.0;
  QuadTensor theta(4, 2);
  theta.packed().bottomRows(2) = Matrix::Random(2, 3);
  const QuadTensor out = orthogonalize_theta(theta, V);
  EXPECT_LE((out.packed() - theta.packed()).norm(), 1e-12);
  EXPECT_TRUE(out.orthogonalized);
  EXPECT_FALSE(theta.orthogonalized);
}

TEST(OrthogonalizeTheta, ColumnInSpanVanishes) {
  Matrix V(3, 1);
  V << 1, 2, 2;
  QuadTensor theta(3, 1);
  theta.column(0, 0) = 5.0 * V.col(0);
  EXPECT_LE(orthogonalize_theta(theta, V).packed().norm(), 1e-12);
}

TEST(OrthogonalizeTheta, SquareBasisLeavesNothing) {
  const Matrix Q = Eigen::HouseholderQR<Matrix>(Matrix::Random(3, 3)).householderQ();
  QuadTensor theta(Matrix(Matrix::Random(3, 6)), 3);
  EXPECT_LE(orthogonalize_theta(theta, Q).packed().norm(), 1e-12);
}

TEST(OrthogonalizeTheta, GeneralBasisOnBeam) {
  const auto& model = desk_beam();
  const auto modes = vibration_modes(model, 5);
  const QuadTensor theta = static_derivatives(model, modes);
  const QuadTensor perp = orthogonalize_theta(theta, modes.V);
  for (Index c = 0; c < perp.packed().cols(); ++c)
    EXPECT_LE((modes.V.transpose() * perp.packed().col(c)).norm(), 1e-10 * theta.packed().col(c).norm());
}

TEST(DeflateBasis, ZeroThetaKeepsSpan) {
  const Matrix V = Matrix::Random(6, 2);
  const Deflation d = deflate_basis(V, QuadTensor(6, 2), 1e-8);
  EXPECT_EQ(d.basis.cols(), 2);
  EXPECT_LE(span_distance(V, d.basis), 1e-10);
}

TEST(DeflateBasis, DuplicateColumnsReduceRank) {
  const Matrix V = Matrix::Random(6, 2);
  QuadTensor theta(6, 2);
  theta.column(0, 0) = V.col(0);
  theta.column(0, 1) = V.col(0) - 2.0 * V.col(1);
  theta.column(1, 1) = Vector::Unit(6, 5);
  const Deflation d = deflate_basis(V, theta, 1e-8);
  EXPECT_EQ(d.basis.cols(), 3);
  EXPECT_EQ(d.singular_values.size(), 5);
}

TEST(DeflateBasis, BeamModesAndStaticDerivatives) {
  const auto& model = desk_beam();
  const auto modes = vibration_modes(model, 5);
  const Deflation d = deflate_basis(modes.V, static_derivatives(model, modes));
  EXPECT_LE(d.basis.cols(), 20);
  EXPECT_GE(d.basis.cols(), 5);
  EXPECT_LE((d.basis.transpose() * d.basis - Matrix::Identity(d.basis.cols(), d.basis.cols())).cwiseAbs().maxCoeff(),
            1e-10);
  for (Index k = 0; k < d.basis.cols(); ++k) EXPECT_GE(d.singular_values[k], 1e-8 * d.singular_values[0]);
  RecordProperty("retained", static_cast<int>(d.basis.cols()));
}

TEST(DeflateBasis, RejectsBadTolerance) {
  const Matrix V = Matrix::Random(4, 1);
  EXPECT_THROW(deflate_basis(V, QuadTensor(4, 1), 0.0), InvalidArgument);
  EXPECT_THROW(deflate_basis(V, QuadTensor(4, 1), 1.0), InvalidArgument);
}

TEST(CombineBases, OrthonormalUnion) {
  const auto& model = desk_beam();
  const auto modes = vibration_modes(model, 3);
  const auto kry = krylov_modes(model, model.load_pattern(), 3);
  const auto both = combine_bases(kry, modes);
  EXPECT_LE((both.V.transpose() * both.V - Matrix::Identity(both.size(), both.size())).norm(), 1e-10);
  Matrix stacked(model.dofs(), 6);
  stacked << kry.V, modes.V;
  EXPECT_LE(span_distance(both.V, stacked.leftCols(3)), 1e-8);
  EXPECT_LE(span_distance(both.V, stacked.rightCols(3)), 1e-8);
}
