#include "qmrom/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "qmrom/errors.hpp"

namespace qmrom {

struct SpdFactor::Impl {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

SpdFactor::SpdFactor(const SparseMatrix& A) : n_(A.rows()) {
  if (A.rows() != A.cols()) throw InvalidArgument("factor_spd: matrix is not square");
  auto impl = std::make_shared<Impl>();
  impl->ldlt.compute(A);
  if (impl->ldlt.info() != Eigen::Success) {
    throw FactorizationError("factor_spd: factorization failed (zero pivot)", -1);
  }
  const Vector& d = impl->ldlt.vectorD();
  const double scale = d.cwiseAbs().maxCoeff();
  for (Index k = 0; k < d.size(); ++k) {
    if (!(d[k] > 1e-14 * scale)) {
      const long pivot = impl->ldlt.permutationPinv().indices()[k];
      throw FactorizationError("factor_spd: matrix is not positive definite (pivot " +
                                   std::to_string(pivot) + ", value " + std::to_string(d[k]) + ")",
                               pivot);
    }
  }
  impl_ = std::move(impl);
}

SpdFactor::SpdFactor(const Matrix& A) : SpdFactor(SparseMatrix(A.sparseView())) {}

Vector SpdFactor::solve(const Vector& b) const {
  if (b.size() != n_) throw InvalidArgument("SpdFactor::solve: size mismatch");
  return impl_->ldlt.solve(b);
}

Matrix SpdFactor::solve(const Matrix& B) const {
  if (B.rows() != n_) throw InvalidArgument("SpdFactor::solve: size mismatch");
  return impl_->ldlt.solve(B);
}

void fix_column_signs(Matrix& X) {
  for (Index j = 0; j < X.cols(); ++j) {
    Index imax = 0;
    X.col(j).cwiseAbs().maxCoeff(&imax);
    if (X(imax, j) < 0.0) X.col(j) *= -1.0;
  }
}

namespace {

EigenPairs finish(Vector values, Matrix vectors) {
  fix_column_signs(vectors);
  return {std::move(values), std::move(vectors)};
}

EigenPairs dense_gsym(const Matrix& K, const Matrix& M, Index k) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(K, M, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw SolverError("eig_gsym: dense solver failed", NAN);
  return finish(es.eigenvalues().head(k), es.eigenvectors().leftCols(k));
}

// Shift-invert (shift 0) block subspace iteration with Rayleigh-Ritz.
EigenPairs subspace_gsym(const SparseMatrix& K, const SparseMatrix& M, Index k,
                         const EigOptions& opts) {
  const Index n = K.rows();
  const Index p = std::min(n, std::max<Index>(2 * k, k + 8));
  const SpdFactor factor(K);

  std::mt19937_64 rng(20160615ULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix X(n, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) X(i, j) = dist(rng);

  Vector lambda;
  double worst = INFINITY;
  for (int it = 0; it <= opts.max_iterations; ++it) {
    const Matrix Y = factor.solve(Matrix(M * X));
    if (it > 0) {
      // Residual of the inverted problem, |x - lambda K^-1 M x| / |x|: well scaled
      // for the low end of the spectrum regardless of the condition of K.
      worst = 0.0;
      for (Index j = 0; j < k; ++j)
        worst = std::max(worst, (X.col(j) - lambda[j] * Y.col(j)).norm() / X.col(j).norm());
      if (worst <= opts.tolerance || it == opts.max_iterations) break;
    }
    const Eigen::HouseholderQR<Matrix> qr(Y);
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, p);
    Matrix Kr = Q.transpose() * (K * Q);
    Matrix Mr = Q.transpose() * (M * Q);
    Kr = 0.5 * (Kr + Kr.transpose()).eval();
    Mr = 0.5 * (Mr + Mr.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Kr, Mr);
    if (es.info() != Eigen::Success) throw SolverError("eig_gsym: Rayleigh-Ritz step failed", NAN);
    lambda = es.eigenvalues();
    X = Q * es.eigenvectors();
  }
  if (!(worst <= 1e-8))
    throw SolverError("eig_gsym: subspace iteration did not converge (residual " +
                          std::to_string(worst) + ")",
                      worst);
  return finish(lambda.head(k), X.leftCols(k));
}

void check_eig_args(Index rowsK, Index colsK, Index rowsM, Index colsM, Index k) {
  if (rowsK != colsK || rowsM != colsM || rowsK != rowsM)
    throw InvalidArgument("eig_gsym: K and M must be square and of equal size");
  if (k < 1 || k > rowsK) throw InvalidArgument("eig_gsym: requested count out of range");
}

}  // namespace

EigenPairs eig_gsym(const SparseMatrix& K, const SparseMatrix& M, Index k,
                    const EigOptions& options) {
  check_eig_args(K.rows(), K.cols(), M.rows(), M.cols(), k);
  if (K.rows() <= options.dense_threshold || 2 * k + 8 >= K.rows())
    return dense_gsym(Matrix(K), Matrix(M), k);
  return subspace_gsym(K, M, k, options);
}

EigenPairs eig_gsym(const Matrix& K, const Matrix& M, Index k) {
  check_eig_args(K.rows(), K.cols(), M.rows(), M.cols(), k);
  return dense_gsym(K, M, k);
}

struct BorderedSolver::Impl {
  Eigen::SparseLU<SparseMatrix> lu;
  Vector constraint;
};

BorderedSolver::BorderedSolver(const SparseMatrix& A, const Vector& constraint, Vector null_vector)
    : null_vector_(std::move(null_vector)), n_(A.rows()) {
  if (A.rows() != A.cols() || constraint.size() != A.rows())
    throw InvalidArgument("solve_bordered: dimension mismatch");
  if (null_vector_.size() != 0 && null_vector_.size() != n_)
    throw InvalidArgument("solve_bordered: null vector has wrong length");
  std::vector<Eigen::Triplet<double, int>> trips;
  trips.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * n_));
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), c, it.value());
  for (Index i = 0; i < n_; ++i) {
    if (constraint[i] == 0.0) continue;
    trips.emplace_back(static_cast<int>(i), static_cast<int>(n_), constraint[i]);
    trips.emplace_back(static_cast<int>(n_), static_cast<int>(i), constraint[i]);
  }
  SparseMatrix B(n_ + 1, n_ + 1);
  B.setFromTriplets(trips.begin(), trips.end());
  B.makeCompressed();
  auto impl = std::make_shared<Impl>();
  impl->constraint = constraint;
  impl->lu.analyzePattern(B);
  impl->lu.factorize(B);
  if (impl->lu.info() != Eigen::Success)
    throw FactorizationError("solve_bordered: augmented system is singular", -1);
  impl_ = std::move(impl);
}

BorderedSolution BorderedSolver::solve(const Vector& rhs) const {
  if (rhs.size() != n_) throw InvalidArgument("solve_bordered: rhs has wrong length");
  const double rhs_norm = rhs.norm();
  if (null_vector_.size() != 0) {
    const double violation = std::abs(null_vector_.dot(rhs));
    if (violation > 1e-8 * null_vector_.norm() * rhs_norm)
      throw ConsistencyError("solve_bordered: right-hand side not orthogonal to the nullspace (|phi^T rhs| = " +
                                 std::to_string(violation) + ")",
                             violation);
  }
  Vector b(n_ + 1);
  b.head(n_) = rhs;
  b[n_] = 0.0;
  const Vector sol = impl_->lu.solve(b);
  if (impl_->lu.info() != Eigen::Success || !sol.allFinite())
    throw SolverError("solve_bordered: back substitution failed", NAN);
  return {sol.head(n_), sol[n_]};
}

BorderedSolution solve_bordered(const SparseMatrix& A, const Vector& constraint, const Vector& rhs,
                                const Vector* null_vector) {
  return BorderedSolver(A, constraint, null_vector ? *null_vector : Vector()).solve(rhs);
}

ThinSvd svd_thin(const Matrix& R) {
  if (!R.allFinite()) throw InvalidArgument("svd_thin: non-finite input");
  if (R.cols() > R.rows()) throw InvalidArgument("svd_thin: more columns than rows");
  Eigen::BDCSVD<Matrix> svd(R, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace qmrom
