#pragma once

#include <string>
#include <vector>

#include "qmrom/fem.hpp"
#include "qmrom/numerics.hpp"
#include "qmrom/quad_tensor.hpp"
#include "qmrom/types.hpp"

namespace qmrom {

enum class ColumnKind { vibration_mode, krylov, other };

struct ColumnInfo {
  ColumnKind kind = ColumnKind::other;
  double omega = 0.0;  // rad/s, vibration modes only
};

/// Linear reduction basis V with per-column provenance.
struct ReductionBasis {
  Matrix V;
  std::vector<ColumnInfo> columns;
  std::vector<std::string> warnings;

  Index size() const { return V.cols(); }
  /// Eigenfrequencies in Hz of the vibration-mode columns, in column order.
  std::vector<double> frequencies_hz() const;
};

/// Lowest n vibration modes of the linearized model, M-normalized, ascending in omega.
ReductionBasis vibration_modes(const StructuralModel& model, Index n);

/// M-orthonormal basis of span{K^-1 F, (K^-1 M) K^-1 F, ...} built by Lanczos
/// with full reorthogonalization. Stops early (with a warning) on breakdown.
ReductionBasis krylov_modes(const StructuralModel& model, const Vector& F, Index n);

/// Euclidean-orthonormal basis of the column span of [A B], truncated by the
/// relative singular-value tolerance rho. Columns are tagged `other`.
ReductionBasis combine_bases(const ReductionBasis& first, const ReductionBasis& second,
                             double rho = 1e-8);

struct FiniteDifferenceOptions {
  /// Step as a fraction of the characteristic length.
  double step_ratio = 1e-5;
  /// Overrides the model's characteristic length when positive.
  double characteristic_length = 0.0;
  /// Repeat every derivative with h/2 and warn on disagreement.
  bool richardson_check = false;
  double richardson_tolerance = 1e-4;
};

/// Central difference (K(h v) - K(-h v)) / 2h along v, with v scaled to unit
/// max-norm before stepping and the result rescaled back.
SparseMatrix stiffness_directional_derivative(const StructuralModel& model, const Vector& v,
                                              const FiniteDifferenceOptions& options = {});

/// Solves K(0) theta_ij = -(dK/dq_j) v_i against one factorization of K(0).
/// Construction assembles K 2n+1 times (once at rest, twice per column).
class StaticDerivativeSolver {
 public:
  StaticDerivativeSolver(const StructuralModel& model, const Matrix& V,
                         const FiniteDifferenceOptions& options = {});

  /// theta_ij from dK/dq_j acting on v_i (no symmetrization).
  Vector derivative(Index i, Index j) const;
  /// All theta_ij with i <= j.
  QuadTensor tensor() const;
  const SparseMatrix& stiffness_derivative(Index j) const { return dK_[static_cast<std::size_t>(j)]; }

 private:
  Matrix V_;
  SpdFactor factor_;
  std::vector<SparseMatrix> dK_;
};

QuadTensor static_derivatives(const StructuralModel& model, const ReductionBasis& basis,
                              const FiniteDifferenceOptions& options = {});
/// Static derivatives with V taken from vibration modes.
QuadTensor static_modal_derivatives(const StructuralModel& model, const ReductionBasis& modes,
                                    const FiniteDifferenceOptions& options = {});

/// Full modal derivatives from the perturbed eigenproblem, solved with the
/// normalization constraint phi_i^T M dphi_i = 0.
class ModalDerivativeSolver {
 public:
  ModalDerivativeSolver(const StructuralModel& model, const ReductionBasis& modes,
                        const FiniteDifferenceOptions& options = {});

  /// d phi_i / d q_j.
  Vector derivative(Index i, Index j) const;
  /// Symmetrized tensor theta_ij = (dphi_i/dq_j + dphi_j/dq_i) / 2.
  QuadTensor tensor() const;

 private:
  Matrix V_;
  SparseMatrix M_;
  std::vector<SparseMatrix> dK_;
  std::vector<BorderedSolver> solvers_;
};

QuadTensor modal_derivatives(const StructuralModel& model, const ReductionBasis& modes,
                             const FiniteDifferenceOptions& options = {});

/// Removes from every theta_ij its component in span(V).
QuadTensor orthogonalize_theta(const QuadTensor& theta, const Matrix& V);

struct Deflation {
  Matrix basis;           // N x m, orthonormal
  Vector singular_values; // of the stacked matrix, descending
};

/// Thin SVD of [V, theta_11, theta_12, ..., theta_nn], keeping left singular
/// vectors with sigma_k >= rho * sigma_1.
Deflation deflate_basis(const Matrix& V, const QuadTensor& theta, double rho = 1e-8);

}  // namespace qmrom
