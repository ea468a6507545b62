#pragma once

#include "qmrom/rom.hpp"

namespace qmrom::detail {

struct QmTerms {
  Vector inertial, force;
  Matrix inertial_acc, inertial_vel, inertial_pos, force_vel, force_pos;
};

QmTerms qm_terms(const StructuralModel& model, const QuadraticManifold& manifold, double t,
                 const Vector& z, const Vector& zd, const Vector& zdd, bool with_jacobians);

}  // namespace qmrom::detail
