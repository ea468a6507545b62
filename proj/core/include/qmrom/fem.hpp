#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qmrom/mesh.hpp"
#include "qmrom/types.hpp"

namespace qmrom {

/// Linear elastic (St. Venant-Kirchhoff) material, plane stress.
struct Material {
  double youngs_modulus = 70e9;  // Pa
  double poisson_ratio = 0.3;
  double density = 2700.0;       // kg/m^3
  double thickness = 1.0;        // m, out-of-plane

  void validate() const;
  bool operator==(const Material&) const = default;
};

/// Scalar forcing g(t) = sum_k a_k sin(2 pi f_k t).
struct Forcing {
  struct Term {
    double amplitude = 1.0;
    double frequency = 1.0;  // Hz
    bool operator==(const Term&) const = default;
  };
  std::vector<Term> terms;

  double operator()(double t) const;
  /// Upper bound of |g(t)|.
  double bound() const;
  bool operator==(const Forcing&) const = default;
};

/// Semi-discrete structural model M u'' + C u' + f(u) = F g(t) on the free dofs.
///
/// Every reduction and integration routine in the library talks to models only
/// through this interface, so analytic toy systems can stand in for finite
/// element models in tests.
class StructuralModel {
 public:
  virtual ~StructuralModel() = default;

  virtual Index dofs() const = 0;
  virtual const SparseMatrix& mass() const = 0;
  virtual Vector internal_force(const Vector& u) const = 0;
  virtual SparseMatrix stiffness(const Vector& u) const = 0;
  /// f(u) and K(u) from a single element sweep.
  virtual void force_and_stiffness(const Vector& u, Vector& f, SparseMatrix& K) const;

  /// Rayleigh damping a M + b K(0); empty (zero) matrix by default.
  virtual const SparseMatrix& damping() const;
  bool has_damping() const { return damping().nonZeros() > 0; }

  const Vector& load_pattern() const { return load_pattern_; }
  void set_load_pattern(Vector pattern);
  const Forcing& forcing() const { return forcing_; }
  void set_forcing(Forcing forcing) { forcing_ = std::move(forcing); }
  Vector external_force(double t) const { return load_pattern_ * forcing_(t); }

  /// Length scale used for finite-difference steps and divergence guards.
  virtual double characteristic_length() const = 0;

 protected:
  Vector load_pattern_;
  Forcing forcing_;
};

/// Total-Lagrangian 6-node plane-stress triangles with homogeneous Dirichlet
/// constraints eliminated from the unknowns.
class FEModel final : public StructuralModel {
 public:
  /// Clamps both displacement components of every node of the named edge sets.
  FEModel(Mesh mesh, Material material, const std::vector<std::string>& clamped_sets = {});

  Index dofs() const override { return free_dofs_; }
  const SparseMatrix& mass() const override { return mass_; }
  Vector internal_force(const Vector& u) const override;
  SparseMatrix stiffness(const Vector& u) const override;
  void force_and_stiffness(const Vector& u, Vector& f, SparseMatrix& K) const override;
  const SparseMatrix& damping() const override { return damping_; }
  double characteristic_length() const override { return mesh_.bounding_diagonal(); }

  void set_rayleigh_damping(double mass_factor, double stiffness_factor);

  const Mesh& mesh() const { return mesh_; }
  const Material& material() const { return material_; }

  /// Global equation number of (node, component), or -1 if constrained.
  Index dof(Index node, int component) const {
    return dof_map_[static_cast<std::size_t>(2 * node + component)];
  }
  /// Nodal vector (2 per node, constrained entries zero) from free-dof vector.
  Vector expand(const Vector& u) const;

  /// Consistent nodal forces of a uniform traction (N/m) on an edge set.
  Vector assemble_load_pattern(const std::string& edge_set, double traction,
                               const Point2& direction) const;

 private:
  struct QuadraturePoint {
    Eigen::Matrix<double, 6, 2> dN;  // reference-configuration gradients
    Eigen::Matrix<double, 6, 1> N;
    double weight;                   // w * detJ * thickness
  };

  void element_sweep(const Vector& u, Vector* f, SparseMatrix* K) const;

  Mesh mesh_;
  Material material_;
  Index free_dofs_ = 0;
  std::vector<Index> dof_map_;
  std::vector<std::array<Index, 12>> element_dofs_;
  std::vector<QuadraturePoint> qp_;       // 6 per element
  SparseMatrix pattern_;                  // stiffness sparsity, zero values
  std::vector<std::array<int, 144>> scatter_;  // element entry -> value slot (-1 if constrained)
  SparseMatrix mass_;
  SparseMatrix damping_;
};

/// Free-function spellings of the model operations.
inline const SparseMatrix& assemble_mass(const StructuralModel& m) { return m.mass(); }
inline Vector assemble_internal_force(const StructuralModel& m, const Vector& u) {
  return m.internal_force(u);
}
inline SparseMatrix assemble_stiffness(const StructuralModel& m, const Vector& u) {
  return m.stiffness(u);
}
inline Vector assemble_load_pattern(const FEModel& m, const std::string& edge_set, double traction,
                                    const Point2& direction) {
  return m.assemble_load_pattern(edge_set, traction, direction);
}

/// Throws InvalidArgument if any entry is NaN or infinite.
void require_finite(const Vector& u, const char* what);

}  // namespace qmrom
