#include "qmrom/systems.hpp"

#include <cmath>
#include <sstream>

#include "qmrom/errors.hpp"
#include "qmrom/numerics.hpp"
#include "rom_detail.hpp"

namespace qmrom {
namespace {

class DenseLuSolver final : public JacobianSolver {
 public:
  explicit DenseLuSolver(const Matrix& J) : lu_(J) {
    if (!lu_.isInvertible()) throw SolverError("singular reduced iteration matrix", std::nan(""));
  }
  Vector solve(const Vector& rhs) const override { return lu_.solve(rhs); }

 private:
  Eigen::FullPivLU<Matrix> lu_;
};

class SparseLdltSolver final : public JacobianSolver {
 public:
  explicit SparseLdltSolver(const SparseMatrix& J) {
    ldlt_.compute(J);
    if (ldlt_.info() != Eigen::Success) throw SolverError("singular iteration matrix", std::nan(""));
  }
  Vector solve(const Vector& rhs) const override { return ldlt_.solve(rhs); }

 private:
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

class SharedSolver final : public JacobianSolver {
 public:
  explicit SharedSolver(std::shared_ptr<JacobianSolver> inner) : inner_(std::move(inner)) {}
  Vector solve(const Vector& rhs) const override { return inner_->solve(rhs); }

 private:
  std::shared_ptr<JacobianSolver> inner_;
};

bool same(const NewtonWeights& a, const NewtonWeights& b) {
  return a.acc == b.acc && a.vel == b.vel && a.pos == b.pos && a.force == b.force;
}

double default_ceiling(const StructuralModel& model) { return 1e3 * model.characteristic_length(); }

}  // namespace

std::unique_ptr<JacobianSolver> dense_jacobian_solver(const Matrix& J) {
  return std::make_unique<DenseLuSolver>(J);
}

// ---------------------------------------------------------------- full

FullSystem::FullSystem(const StructuralModel& model, bool linearized)
    : model_(model), linearized_(linearized) {
  if (linearized_) K0_ = model_.stiffness(Vector::Zero(model_.dofs()));
}

SystemEvaluation FullSystem::evaluate(double t, const Vector& q, const Vector& qd,
                                      const Vector& qdd) const {
  SystemEvaluation ev;
  ev.inertial = model_.mass() * qdd;
  ev.force = linearized_ ? Vector(K0_ * q) : model_.internal_force(q);
  ev.force -= model_.external_force(t);
  if (model_.has_damping()) ev.force += model_.damping() * qd;
  return ev;
}

std::unique_ptr<JacobianSolver> FullSystem::jacobian(double, const Vector& q, const Vector&,
                                                     const Vector&,
                                                     const NewtonWeights& w) const {
  auto build = [&](const SparseMatrix& K) {
    SparseMatrix J = w.acc * model_.mass();
    if (w.pos != 0.0) J += (w.pos * w.force) * K;
    if (w.vel != 0.0 && model_.has_damping()) J += (w.vel * w.force) * model_.damping();
    return J;
  };
  if (linearized_) {
    std::lock_guard lock(cache_mutex_);
    if (!cached_ || !same(w, cached_weights_)) {
      cached_ = std::make_shared<SparseLdltSolver>(build(K0_));
      cached_weights_ = w;
    }
    return std::make_unique<SharedSolver>(cached_);
  }
  const SparseMatrix K = w.pos != 0.0 ? model_.stiffness(q) : SparseMatrix(q.size(), q.size());
  return std::make_unique<SparseLdltSolver>(build(K));
}

double FullSystem::load_scale() const {
  return model_.load_pattern().norm() * model_.forcing().bound();
}

double FullSystem::displacement_ceiling() const { return default_ceiling(model_); }

// ---------------------------------------------------------------- linear basis

LinearBasisSystem::LinearBasisSystem(const StructuralModel& model, Matrix V)
    : model_(model), V_(std::move(V)) {
  if (V_.rows() != model_.dofs()) throw InvalidArgument("linear basis has wrong length");
  mass_ = V_.transpose() * (model_.mass() * V_);
  if (model_.has_damping()) damping_ = V_.transpose() * (model_.damping() * V_);
  load_ = V_.transpose() * model_.load_pattern();
}

SystemEvaluation LinearBasisSystem::evaluate(double t, const Vector& q, const Vector& qd,
                                             const Vector& qdd) const {
  require_finite(q, "reduced displacement");
  SystemEvaluation ev;
  ev.inertial = mass_ * qdd;
  ev.force = V_.transpose() * model_.internal_force(V_ * q) - load_ * model_.forcing()(t);
  if (damping_.size() > 0) ev.force += damping_ * qd;
  return ev;
}

std::unique_ptr<JacobianSolver> LinearBasisSystem::jacobian(double, const Vector& q, const Vector&,
                                                            const Vector&,
                                                            const NewtonWeights& w) const {
  Matrix J = w.acc * mass_;
  if (w.pos != 0.0) {
    const SparseMatrix K = model_.stiffness(V_ * q);
    J += (w.pos * w.force) * (V_.transpose() * (K * V_));
  }
  if (w.vel != 0.0 && damping_.size() > 0) J += (w.vel * w.force) * damping_;
  return dense_jacobian_solver(J);
}

double LinearBasisSystem::load_scale() const { return load_.norm() * model_.forcing().bound(); }

double LinearBasisSystem::displacement_ceiling() const { return default_ceiling(model_); }

// ---------------------------------------------------------------- quadratic manifold

QuadraticManifoldSystem::QuadraticManifoldSystem(const StructuralModel& model,
                                                 QuadraticManifold manifold)
    : model_(model), manifold_(std::move(manifold)) {
  if (manifold_.full_size() != model_.dofs()) throw InvalidArgument("manifold has wrong length");
}

SystemEvaluation QuadraticManifoldSystem::evaluate(double t, const Vector& q, const Vector& qd,
                                                   const Vector& qdd) const {
  auto terms = detail::qm_terms(model_, manifold_, t, q, qd, qdd, false);
  return {std::move(terms.inertial), std::move(terms.force)};
}

std::unique_ptr<JacobianSolver> QuadraticManifoldSystem::jacobian(double t, const Vector& q,
                                                                  const Vector& qd,
                                                                  const Vector& qdd,
                                                                  const NewtonWeights& w) const {
  const auto terms = detail::qm_terms(model_, manifold_, t, q, qd, qdd, true);
  Matrix J = w.acc * terms.inertial_acc;
  J += w.vel * (terms.inertial_vel + w.force * terms.force_vel);
  J += w.pos * (terms.inertial_pos + w.force * terms.force_pos);
  return dense_jacobian_solver(J);
}

double QuadraticManifoldSystem::load_scale() const {
  return (manifold_.basis().transpose() * model_.load_pattern()).norm() * model_.forcing().bound();
}

double QuadraticManifoldSystem::displacement_ceiling() const { return default_ceiling(model_); }

std::optional<std::string> QuadraticManifoldSystem::check_state(const Vector& q) const {
  const Eigen::JacobiSVD<Matrix> svd(manifold_.tangent(q));
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s[0] <= 0.0) return std::string("tangent projector vanished");
  const double ratio = s[s.size() - 1] / s[0];
  if (ratio < 1e-8) {
    std::ostringstream msg;
    msg << "ill-conditioned tangent projector (sigma_min/sigma_max = " << ratio << ")";
    return msg.str();
  }
  return std::nullopt;
}

}  // namespace qmrom
