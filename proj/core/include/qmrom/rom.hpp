#pragma once

#include <string>

#include "qmrom/fem.hpp"
#include "qmrom/quad_tensor.hpp"
#include "qmrom/types.hpp"

namespace qmrom {

/// Quadratic configuration map u = V z + 1/2 Theta z z.
class QuadraticManifold {
 public:
  QuadraticManifold(Matrix V, QuadTensor theta, std::string tag = {});

  Index reduced_size() const { return V_.cols(); }
  Index full_size() const { return V_.rows(); }
  const Matrix& basis() const { return V_; }
  const QuadTensor& theta() const { return theta_; }
  const std::string& tag() const { return tag_; }

  Vector displacement(const Vector& z) const;
  /// Tangent projector P(z) = V + Theta z = d Gamma / d z.
  Matrix tangent(const Vector& z) const;
  /// Theta zd zd: the acceleration contribution of manifold curvature.
  Vector curvature(const Vector& zd) const;

 private:
  Matrix V_;
  QuadTensor theta_;
  std::string tag_;
};

struct QmEvaluation {
  Vector u;
  Matrix P;
};

QmEvaluation qm_evaluate(const QuadraticManifold& manifold, const Vector& z);

/// P^T M P zdd + P^T M Theta zd zd + P^T C P zd + P^T f(Gamma(z)) - P^T F g(t).
Vector qm_residual(const StructuralModel& model, const QuadraticManifold& manifold, const Vector& z,
                   const Vector& zd, const Vector& zdd, double t);

struct QmJacobians {
  Matrix d_acc;  // dr/dzdd
  Matrix d_vel;  // dr/dzd
  Matrix d_pos;  // dr/dz
};

/// Exact linearization of qm_residual including every Theta coupling term.
QmJacobians qm_jacobians(const StructuralModel& model, const QuadraticManifold& manifold,
                         const Vector& z, const Vector& zd, const Vector& zdd, double t);

}  // namespace qmrom
