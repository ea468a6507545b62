#pragma once

#include <utility>

#include "qmrom/types.hpp"

namespace qmrom {

/// Third-order tensor Theta (N x n x n) symmetric in its last two indices,
/// stored as N x n(n+1)/2 with packed columns in (i <= j) lexicographic order:
/// theta_11, theta_12, ..., theta_1n, theta_22, ..., theta_nn.
class QuadTensor {
 public:
  QuadTensor() = default;
  QuadTensor(Index full_size, Index reduced_size);
  QuadTensor(Matrix packed, Index reduced_size);

  Index full_size() const { return data_.rows(); }
  Index reduced_size() const { return n_; }
  static Index packed_count(Index n) { return n * (n + 1) / 2; }
  Index packed_index(Index i, Index j) const;
  std::pair<Index, Index> pair_of(Index packed) const;

  const Matrix& packed() const { return data_; }
  Matrix& packed() { return data_; }

  auto column(Index i, Index j) { return data_.col(packed_index(i, j)); }
  auto column(Index i, Index j) const { return data_.col(packed_index(i, j)); }

  /// (Theta a b)_l = sum_ij theta_lij a_i b_j.
  Vector contract2(const Vector& a, const Vector& b) const;
  /// (Theta z)_{l,i} = sum_k theta_lik z_k  (N x n).
  Matrix contract1(const Vector& z) const;
  /// W_ij = theta_ij^T w  (n x n, symmetric).
  Matrix project(const Vector& w) const;

  bool orthogonalized = false;

 private:
  Matrix data_;
  Index n_ = 0;
};

}  // namespace qmrom
