#pragma once

#include <vector>

#include "qmrom/fem.hpp"

namespace qmrom {

/// Straight von Karman beam: 2-node elements with axial displacement u (linear)
/// and transverse deflection w (cubic Hermite, nodal w and w').
/// Axial strain u' + w'^2/2, curvature w''.
class VkBeamModel final : public StructuralModel {
 public:
  enum Component : int { axial = 0, transverse = 1, rotation = 2 };

  /// Both ends clamped when `clamp_both_ends`, otherwise only the left end.
  VkBeamModel(double length, double height, int n_elements, Material material,
              bool clamp_both_ends = true);

  Index dofs() const override { return free_dofs_; }
  const SparseMatrix& mass() const override { return mass_; }
  Vector internal_force(const Vector& u) const override;
  SparseMatrix stiffness(const Vector& u) const override;
  void force_and_stiffness(const Vector& u, Vector& f, SparseMatrix& K) const override;
  double characteristic_length() const override;

  /// Consistent nodal loads of a uniform transverse line load q (N/m).
  Vector distributed_load(double q) const;

  Index dof(Index node, Component c) const {
    return dof_map_[static_cast<std::size_t>(3 * node + c)];
  }
  Index node_count() const { return n_elements_ + 1; }
  double node_x(Index node) const { return length_ * static_cast<double>(node) / n_elements_; }
  /// Free axial dofs, ascending.
  const std::vector<Index>& membrane_dofs() const { return membrane_dofs_; }
  /// Free transverse and rotation dofs, ascending.
  const std::vector<Index>& bending_dofs() const { return bending_dofs_; }

  double axial_rigidity() const { return axial_rigidity_; }
  double bending_rigidity() const { return bending_rigidity_; }
  double mass_per_length() const { return mass_per_length_; }

 private:
  void sweep(const Vector& u, Vector* f, SparseMatrix* K) const;

  double length_, height_;
  int n_elements_;
  double axial_rigidity_, bending_rigidity_, mass_per_length_;
  Index free_dofs_ = 0;
  std::vector<Index> dof_map_;
  std::vector<Index> membrane_dofs_, bending_dofs_;
  SparseMatrix mass_;
};

/// Clamped-clamped von Karman beam model.
VkBeamModel vk_beam_model(double length, double height, int n_elements, const Material& material);

}  // namespace qmrom
