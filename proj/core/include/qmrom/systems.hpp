#pragma once

#include <memory>
#include <mutex>

#include "qmrom/fem.hpp"
#include "qmrom/integrate.hpp"
#include "qmrom/rom.hpp"

namespace qmrom {

// All systems keep a reference to the model; the model must outlive them.

/// Unreduced model, either fully nonlinear or linearized about u = 0.
class FullSystem final : public SecondOrderSystem {
 public:
  FullSystem(const StructuralModel& model, bool linearized);

  Index size() const override { return model_.dofs(); }
  Index full_size() const override { return model_.dofs(); }
  SystemEvaluation evaluate(double t, const Vector& q, const Vector& qd,
                            const Vector& qdd) const override;
  std::unique_ptr<JacobianSolver> jacobian(double t, const Vector& q, const Vector& qd,
                                           const Vector& qdd,
                                           const NewtonWeights& weights) const override;
  Vector lift(const Vector& q) const override { return q; }
  double load_scale() const override;
  double displacement_ceiling() const override;

 private:
  const StructuralModel& model_;
  bool linearized_;
  SparseMatrix K0_;
  // constant iteration matrix of the linearized system, keyed by its weights
  mutable std::mutex cache_mutex_;
  mutable NewtonWeights cached_weights_{-1.0, -1.0, -1.0, -1.0};
  mutable std::shared_ptr<JacobianSolver> cached_;
};

/// Galerkin projection on a constant basis: u = V q.
class LinearBasisSystem final : public SecondOrderSystem {
 public:
  LinearBasisSystem(const StructuralModel& model, Matrix V);

  Index size() const override { return V_.cols(); }
  Index full_size() const override { return V_.rows(); }
  SystemEvaluation evaluate(double t, const Vector& q, const Vector& qd,
                            const Vector& qdd) const override;
  std::unique_ptr<JacobianSolver> jacobian(double t, const Vector& q, const Vector& qd,
                                           const Vector& qdd,
                                           const NewtonWeights& weights) const override;
  Vector lift(const Vector& q) const override { return V_ * q; }
  double load_scale() const override;
  double displacement_ceiling() const override;
  const Matrix& basis() const { return V_; }

 private:
  const StructuralModel& model_;
  Matrix V_;
  Matrix mass_, damping_;
  Vector load_;
};

/// Projection onto the tangent space of a quadratic manifold.
class QuadraticManifoldSystem final : public SecondOrderSystem {
 public:
  QuadraticManifoldSystem(const StructuralModel& model, QuadraticManifold manifold);

  Index size() const override { return manifold_.reduced_size(); }
  Index full_size() const override { return manifold_.full_size(); }
  SystemEvaluation evaluate(double t, const Vector& q, const Vector& qd,
                            const Vector& qdd) const override;
  std::unique_ptr<JacobianSolver> jacobian(double t, const Vector& q, const Vector& qd,
                                           const Vector& qdd,
                                           const NewtonWeights& weights) const override;
  Vector lift(const Vector& q) const override { return manifold_.displacement(q); }
  double load_scale() const override;
  double displacement_ceiling() const override;
  /// Flags a tangent projector whose smallest singular value drops below 1e-8 sigma_1.
  std::optional<std::string> check_state(const Vector& q) const override;
  const QuadraticManifold& manifold() const { return manifold_; }

 private:
  const StructuralModel& model_;
  QuadraticManifold manifold_;
};

/// Dense LU solve of a small iteration matrix; throws SolverError if singular.
std::unique_ptr<JacobianSolver> dense_jacobian_solver(const Matrix& J);

}  // namespace qmrom
