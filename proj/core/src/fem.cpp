#include "qmrom/fem.hpp"

#include <cmath>

#include "qmrom/errors.hpp"

namespace qmrom {

void Material::validate() const {
  if (!(youngs_modulus > 0.0)) throw InvalidArgument("Young's modulus must be positive");
  if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5))
    throw InvalidArgument("Poisson ratio must lie in (-1, 0.5)");
  if (!(density > 0.0)) throw InvalidArgument("density must be positive");
  if (!(thickness > 0.0)) throw InvalidArgument("thickness must be positive");
}

double Forcing::operator()(double t) const {
  double g = 0.0;
  for (const auto& term : terms) g += term.amplitude * std::sin(2.0 * M_PI * term.frequency * t);
  return g;
}

double Forcing::bound() const {
  double b = 0.0;
  for (const auto& term : terms) b += std::abs(term.amplitude);
  return b;
}

void StructuralModel::force_and_stiffness(const Vector& u, Vector& f, SparseMatrix& K) const {
  f = internal_force(u);
  K = stiffness(u);
}

const SparseMatrix& StructuralModel::damping() const {
  static const SparseMatrix empty;
  return empty;
}

void StructuralModel::set_load_pattern(Vector pattern) {
  if (pattern.size() != dofs()) throw InvalidArgument("load pattern has wrong length");
  load_pattern_ = std::move(pattern);
}

void require_finite(const Vector& u, const char* what) {
  if (!u.allFinite()) throw InvalidArgument(std::string(what) + " contains non-finite entries");
}

}  // namespace qmrom
