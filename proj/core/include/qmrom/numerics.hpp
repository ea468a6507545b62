#pragma once

#include <memory>

#include "qmrom/types.hpp"

namespace qmrom {

/// Sparse LDL^T factorization of a symmetric positive definite matrix,
/// immutable after construction and cheap to copy (shared factor).
class SpdFactor {
 public:
  /// Throws FactorizationError (with the offending pivot in original
  /// numbering) if the matrix is not positive definite.
  explicit SpdFactor(const SparseMatrix& A);
  explicit SpdFactor(const Matrix& A);

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& B) const;
  Index size() const { return n_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  Index n_ = 0;
};

inline SpdFactor factor_spd(const SparseMatrix& A) { return SpdFactor(A); }

struct EigenPairs {
  Vector eigenvalues;  // omega^2, ascending
  Matrix vectors;      // mass-normalized columns
};

struct EigOptions {
  /// Dense solver at or below this size, shift-invert subspace iteration above.
  Index dense_threshold = 200;
  double tolerance = 1e-10;
  int max_iterations = 300;
};

/// Lowest k eigenpairs of K phi = lambda M phi with K, M symmetric positive
/// definite. Each eigenvector is M-normalized with its largest-magnitude
/// entry positive.
EigenPairs eig_gsym(const SparseMatrix& K, const SparseMatrix& M, Index k,
                    const EigOptions& options = {});
EigenPairs eig_gsym(const Matrix& K, const Matrix& M, Index k);

struct BorderedSolution {
  Vector x;
  double multiplier = 0.0;
};

/// Solves [[A, c], [c^T, 0]] [x; l] = [rhs; 0] for a symmetric A with a
/// one-dimensional nullspace. If `null_vector` is given, the solvability
/// condition null_vector^T rhs ~ 0 (relative 1e-8) is checked first; a
/// ConsistencyError reports the violation.
BorderedSolution solve_bordered(const SparseMatrix& A, const Vector& constraint, const Vector& rhs,
                                const Vector* null_vector = nullptr);

/// Factor-once variant for many right-hand sides with the same A and constraint.
class BorderedSolver {
 public:
  BorderedSolver(const SparseMatrix& A, const Vector& constraint, Vector null_vector = {});
  BorderedSolution solve(const Vector& rhs) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  Vector null_vector_;
  Index n_;
};

struct ThinSvd {
  Matrix U;      // N x m, orthonormal columns
  Vector sigma;  // descending
  Matrix V;      // m x m
};

ThinSvd svd_thin(const Matrix& R);

/// Makes the largest-magnitude entry of each column positive.
void fix_column_signs(Matrix& X);

}  // namespace qmrom
