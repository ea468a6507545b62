#include "qmrom/basis.hpp"

#include <cmath>
#include <sstream>

#include "qmrom/errors.hpp"
#include "qmrom/log.hpp"

namespace qmrom {

std::vector<double> ReductionBasis::frequencies_hz() const {
  std::vector<double> out;
  for (const auto& c : columns)
    if (c.kind == ColumnKind::vibration_mode) out.push_back(c.omega / (2.0 * M_PI));
  return out;
}

ReductionBasis vibration_modes(const StructuralModel& model, Index n) {
  const SparseMatrix K0 = model.stiffness(Vector::Zero(model.dofs()));
  EigenPairs pairs = eig_gsym(K0, model.mass(), n);
  ReductionBasis basis;
  basis.V = std::move(pairs.vectors);
  for (Index i = 0; i < n; ++i)
    basis.columns.push_back({ColumnKind::vibration_mode, std::sqrt(std::max(0.0, pairs.eigenvalues[i]))});
  return basis;
}

ReductionBasis krylov_modes(const StructuralModel& model, const Vector& F, Index n) {
  if (F.size() != model.dofs()) throw InvalidArgument("krylov_modes: load has wrong length");
  if (!(F.norm() > 0.0)) throw InvalidArgument("krylov_modes: load pattern is zero");
  if (n < 1) throw InvalidArgument("krylov_modes: need at least one vector");
  const SparseMatrix& M = model.mass();
  const SpdFactor factor(model.stiffness(Vector::Zero(model.dofs())));
  auto m_norm = [&](const Vector& x) { return std::sqrt(x.dot(M * x)); };

  ReductionBasis basis;
  basis.V.resize(model.dofs(), n);
  Vector w = factor.solve(F);
  Index count = 0;
  for (Index k = 0; k < n; ++k) {
    if (k > 0) w = factor.solve(Vector(M * basis.V.col(k - 1)));
    const double before = m_norm(w);
    for (int pass = 0; pass < 2; ++pass)
      for (Index j = 0; j < k; ++j) w -= basis.V.col(j).dot(M * w) * basis.V.col(j);
    const double after = m_norm(w);
    if (!(after > 1e-10 * before)) {
      std::ostringstream msg;
      msg << "krylov_modes: breakdown after " << k << " of " << n << " vectors";
      basis.warnings.push_back(msg.str());
      log::warn(msg.str());
      break;
    }
    basis.V.col(k) = w / after;
    basis.columns.push_back({ColumnKind::krylov, 0.0});
    ++count;
  }
  basis.V.conservativeResize(Eigen::NoChange, count);
  return basis;
}

ReductionBasis combine_bases(const ReductionBasis& first, const ReductionBasis& second, double rho) {
  Matrix stacked(first.V.rows(), first.size() + second.size());
  stacked << first.V, second.V;
  const ThinSvd svd = svd_thin(stacked);
  Index m = 0;
  while (m < svd.sigma.size() && svd.sigma[m] >= rho * svd.sigma[0]) ++m;
  ReductionBasis out;
  out.V = svd.U.leftCols(m);
  fix_column_signs(out.V);
  out.columns.assign(static_cast<std::size_t>(m), ColumnInfo{});
  out.warnings = first.warnings;
  out.warnings.insert(out.warnings.end(), second.warnings.begin(), second.warnings.end());
  return out;
}

namespace {

SparseMatrix central_difference(const StructuralModel& model, const Vector& direction, double h) {
  SparseMatrix plus = model.stiffness(h * direction);
  const SparseMatrix minus = model.stiffness(-h * direction);
  plus -= minus;
  plus *= 1.0 / (2.0 * h);
  return plus;
}

}  // namespace

SparseMatrix stiffness_directional_derivative(const StructuralModel& model, const Vector& v,
                                              const FiniteDifferenceOptions& options) {
  if (v.size() != model.dofs()) throw InvalidArgument("directional derivative: wrong length");
  const double scale = v.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw InvalidArgument("directional derivative: direction is zero");
  const double length =
      options.characteristic_length > 0.0 ? options.characteristic_length : model.characteristic_length();
  const double h = options.step_ratio * length;
  const Vector direction = v / scale;

  SparseMatrix dK = central_difference(model, direction, h);
  if (options.richardson_check) {
    const SparseMatrix half = central_difference(model, direction, 0.5 * h);
    const double ref = half.norm();
    const double diff = SparseMatrix(dK - half).norm();
    if (ref > 0.0 && diff > options.richardson_tolerance * ref) {
      std::ostringstream msg;
      msg << "stiffness derivative step check: h and h/2 differ by " << diff / ref << " (relative)";
      log::warn(msg.str());
    }
  }
  dK *= scale;
  return dK;
}

StaticDerivativeSolver::StaticDerivativeSolver(const StructuralModel& model, const Matrix& V,
                                               const FiniteDifferenceOptions& options)
    : V_(V), factor_(model.stiffness(Vector::Zero(model.dofs()))) {
  if (V.rows() != model.dofs()) throw InvalidArgument("static derivatives: basis has wrong length");
  dK_.reserve(static_cast<std::size_t>(V.cols()));
  for (Index j = 0; j < V.cols(); ++j)
    dK_.push_back(stiffness_directional_derivative(model, V.col(j), options));
}

Vector StaticDerivativeSolver::derivative(Index i, Index j) const {
  return -factor_.solve(Vector(dK_[static_cast<std::size_t>(j)] * V_.col(i)));
}

QuadTensor StaticDerivativeSolver::tensor() const {
  const Index n = V_.cols();
  QuadTensor theta(V_.rows(), n);
  Matrix rhs(V_.rows(), QuadTensor::packed_count(n));
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j)
      rhs.col(theta.packed_index(i, j)) = dK_[static_cast<std::size_t>(j)] * V_.col(i);
  theta.packed() = -factor_.solve(rhs);
  return theta;
}

QuadTensor static_derivatives(const StructuralModel& model, const ReductionBasis& basis,
                              const FiniteDifferenceOptions& options) {
  return StaticDerivativeSolver(model, basis.V, options).tensor();
}

QuadTensor static_modal_derivatives(const StructuralModel& model, const ReductionBasis& modes,
                                    const FiniteDifferenceOptions& options) {
  for (const auto& c : modes.columns)
    if (c.kind != ColumnKind::vibration_mode)
      throw InvalidArgument("static modal derivatives need a vibration-mode basis");
  return static_derivatives(model, modes, options);
}

ModalDerivativeSolver::ModalDerivativeSolver(const StructuralModel& model,
                                             const ReductionBasis& modes,
                                             const FiniteDifferenceOptions& options)
    : V_(modes.V), M_(model.mass()) {
  const Index n = modes.size();
  if (static_cast<Index>(modes.columns.size()) != n) throw InvalidArgument("modal derivatives: missing column info");
  for (const auto& c : modes.columns)
    if (c.kind != ColumnKind::vibration_mode)
      throw InvalidArgument("modal derivatives need a vibration-mode basis");
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b) {
      const double la = std::pow(modes.columns[static_cast<std::size_t>(a)].omega, 2);
      const double lb = std::pow(modes.columns[static_cast<std::size_t>(b)].omega, 2);
      if (std::abs(la - lb) < 1e-6 * std::max(std::abs(la), std::abs(lb)))
        throw DegenerateModeError("modal derivatives: eigenvalues of modes " + std::to_string(a) +
                                  " and " + std::to_string(b) + " are not distinct");
    }

  const SparseMatrix K0 = model.stiffness(Vector::Zero(model.dofs()));
  for (Index j = 0; j < n; ++j) dK_.push_back(stiffness_directional_derivative(model, V_.col(j), options));
  for (Index i = 0; i < n; ++i) {
    const double lambda = std::pow(modes.columns[static_cast<std::size_t>(i)].omega, 2);
    const SparseMatrix A = K0 - lambda * M_;
    solvers_.emplace_back(A, Vector(M_ * V_.col(i)), V_.col(i));
  }
}

Vector ModalDerivativeSolver::derivative(Index i, Index j) const {
  const Vector phi = V_.col(i);
  const Vector dKphi = dK_[static_cast<std::size_t>(j)] * phi;
  const double dlambda = phi.dot(dKphi);
  const Vector rhs = -(dKphi - dlambda * (M_ * phi));
  return solvers_[static_cast<std::size_t>(i)].solve(rhs).x;
}

QuadTensor ModalDerivativeSolver::tensor() const {
  const Index n = V_.cols();
  Matrix raw(V_.rows(), n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) raw.col(i * n + j) = derivative(i, j);
  QuadTensor theta(V_.rows(), n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) theta.column(i, j) = 0.5 * (raw.col(i * n + j) + raw.col(j * n + i));
  return theta;
}

QuadTensor modal_derivatives(const StructuralModel& model, const ReductionBasis& modes,
                             const FiniteDifferenceOptions& options) {
  return ModalDerivativeSolver(model, modes, options).tensor();
}

QuadTensor orthogonalize_theta(const QuadTensor& theta, const Matrix& V) {
  if (V.rows() != theta.full_size()) throw InvalidArgument("orthogonalize_theta: size mismatch");
  const ThinSvd svd = svd_thin(V);
  Index rank = 0;
  while (rank < svd.sigma.size() && svd.sigma[rank] > 1e-12 * svd.sigma[0]) ++rank;
  const Matrix Q = svd.U.leftCols(rank);
  QuadTensor out = theta;
  out.packed() -= Q * (Q.transpose() * theta.packed());
  // second pass against cancellation
  out.packed() -= Q * (Q.transpose() * out.packed());
  out.orthogonalized = true;
  return out;
}

Deflation deflate_basis(const Matrix& V, const QuadTensor& theta, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("deflate_basis: rho must lie in (0,1)");
  const Index cols = V.cols() + theta.packed().cols();
  if (cols == 0) throw InvalidArgument("deflate_basis: empty input");
  if (theta.packed().cols() > 0 && theta.full_size() != V.rows())
    throw InvalidArgument("deflate_basis: size mismatch");
  Matrix R(V.rows(), cols);
  R.leftCols(V.cols()) = V;
  if (theta.packed().cols() > 0) R.rightCols(theta.packed().cols()) = theta.packed();
  ThinSvd svd;
  if (R.cols() <= R.rows()) {
    svd = svd_thin(R);
  } else {
    // more vectors than dofs (toy problems): the rank is at most N anyway
    Eigen::BDCSVD<Matrix> wide(R, Eigen::ComputeThinU);
    svd.U = wide.matrixU();
    svd.sigma = wide.singularValues();
  }
  Index m = 0;
  while (m < svd.sigma.size() && svd.sigma[m] >= rho * svd.sigma[0] && svd.sigma[m] > 0.0) ++m;
  Deflation out{svd.U.leftCols(m), svd.sigma};
  fix_column_signs(out.basis);
  return out;
}

}  // namespace qmrom
