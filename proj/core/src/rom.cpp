#include "qmrom/rom.hpp"

#include <utility>

#include "qmrom/errors.hpp"
#include "rom_detail.hpp"

namespace qmrom {

QuadraticManifold::QuadraticManifold(Matrix V, QuadTensor theta, std::string tag)
    : V_(std::move(V)), theta_(std::move(theta)), tag_(std::move(tag)) {
  if (theta_.reduced_size() != V_.cols() || theta_.full_size() != V_.rows())
    throw InvalidArgument("QuadraticManifold: basis and tensor dimensions disagree");
}

Vector QuadraticManifold::displacement(const Vector& z) const {
  if (z.size() != V_.cols()) throw InvalidArgument("QuadraticManifold: state has wrong length");
  return V_ * z + 0.5 * theta_.contract2(z, z);
}

Matrix QuadraticManifold::tangent(const Vector& z) const {
  if (z.size() != V_.cols()) throw InvalidArgument("QuadraticManifold: state has wrong length");
  return V_ + theta_.contract1(z);
}

Vector QuadraticManifold::curvature(const Vector& zd) const {
  return theta_.contract2(zd, zd);
}

QmEvaluation qm_evaluate(const QuadraticManifold& manifold, const Vector& z) {
  return {manifold.displacement(z), manifold.tangent(z)};
}

namespace detail {

QmTerms qm_terms(const StructuralModel& model, const QuadraticManifold& manifold, double t,
                 const Vector& z, const Vector& zd, const Vector& zdd, bool with_jacobians) {
  const Index n = manifold.reduced_size();
  if (zd.size() != n || zdd.size() != n) throw InvalidArgument("qm_residual: state has wrong length");
  require_finite(z, "reduced displacement");
  require_finite(zd, "reduced velocity");
  require_finite(zdd, "reduced acceleration");

  const SparseMatrix& M = model.mass();
  const SparseMatrix& C = model.damping();
  const bool damped = model.has_damping();
  const QuadTensor& theta = manifold.theta();

  QmTerms out;
  const Vector u = manifold.displacement(z);
  const Matrix P = manifold.tangent(z);
  const Matrix theta_zd = theta.contract1(zd);  // N x n
  const Vector accel = P * zdd + theta_zd * zd;  // full acceleration
  const Vector Ma = M * accel;

  Vector f;
  SparseMatrix K;
  if (with_jacobians)
    model.force_and_stiffness(u, f, K);
  else
    f = model.internal_force(u);
  Vector rf = f - model.external_force(t);
  Vector Cv;
  if (damped) {
    Cv = C * (P * zd);
    rf += Cv;
  }

  out.inertial = P.transpose() * Ma;
  out.force = P.transpose() * rf;
  if (!with_jacobians) return out;

  const Matrix MP = M * P;
  out.inertial_acc = P.transpose() * MP;
  out.inertial_vel = 2.0 * MP.transpose() * theta_zd;
  out.inertial_pos = theta.project(Ma) + MP.transpose() * theta.contract1(zdd);
  out.force_pos = theta.project(rf) + P.transpose() * (K * P);
  if (damped) {
    const Matrix CP = C * P;
    out.force_vel = P.transpose() * CP;
    out.force_pos += CP.transpose() * theta_zd;
  } else {
    out.force_vel = Matrix::Zero(n, n);
  }
  return out;
}

}  // namespace detail

Vector qm_residual(const StructuralModel& model, const QuadraticManifold& manifold, const Vector& z,
                   const Vector& zd, const Vector& zdd, double t) {
  const auto terms = detail::qm_terms(model, manifold, t, z, zd, zdd, false);
  return terms.inertial + terms.force;
}

QmJacobians qm_jacobians(const StructuralModel& model, const QuadraticManifold& manifold,
                         const Vector& z, const Vector& zd, const Vector& zdd, double t) {
  const auto terms = detail::qm_terms(model, manifold, t, z, zd, zdd, true);
  return {terms.inertial_acc, terms.inertial_vel + terms.force_vel,
          terms.inertial_pos + terms.force_pos};
}

}  // namespace qmrom
