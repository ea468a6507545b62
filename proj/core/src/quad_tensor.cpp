#include "qmrom/quad_tensor.hpp"

#include <utility>

#include "qmrom/errors.hpp"

namespace qmrom {

QuadTensor::QuadTensor(Index full_size, Index reduced_size)
    : data_(Matrix::Zero(full_size, packed_count(reduced_size))), n_(reduced_size) {}

QuadTensor::QuadTensor(Matrix packed, Index reduced_size) : data_(std::move(packed)), n_(reduced_size) {
  if (data_.cols() != packed_count(n_))
    throw InvalidArgument("QuadTensor: packed column count does not match n(n+1)/2");
}

Index QuadTensor::packed_index(Index i, Index j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= n_) throw InvalidArgument("QuadTensor: index out of range");
  return i * n_ - i * (i - 1) / 2 + (j - i);
}

std::pair<Index, Index> QuadTensor::pair_of(Index packed) const {
  Index i = 0;
  while (packed >= n_ - i) {
    packed -= n_ - i;
    ++i;
  }
  return {i, i + packed};
}

Vector QuadTensor::contract2(const Vector& a, const Vector& b) const {
  if (a.size() != n_ || b.size() != n_) throw InvalidArgument("QuadTensor: vector size mismatch");
  Vector weights(data_.cols());
  Index col = 0;
  for (Index i = 0; i < n_; ++i)
    for (Index j = i; j < n_; ++j, ++col)
      weights[col] = i == j ? a[i] * b[i] : a[i] * b[j] + a[j] * b[i];
  return data_ * weights;
}

Matrix QuadTensor::contract1(const Vector& z) const {
  if (z.size() != n_) throw InvalidArgument("QuadTensor: vector size mismatch");
  Matrix out = Matrix::Zero(data_.rows(), n_);
  Index col = 0;
  for (Index i = 0; i < n_; ++i)
    for (Index j = i; j < n_; ++j, ++col) {
      out.col(i) += z[j] * data_.col(col);
      if (j != i) out.col(j) += z[i] * data_.col(col);
    }
  return out;
}

Matrix QuadTensor::project(const Vector& w) const {
  if (w.size() != data_.rows()) throw InvalidArgument("QuadTensor: vector size mismatch");
  const Vector packed = data_.transpose() * w;
  Matrix W(n_, n_);
  Index col = 0;
  for (Index i = 0; i < n_; ++i)
    for (Index j = i; j < n_; ++j, ++col) W(i, j) = W(j, i) = packed[col];
  return W;
}

}  // namespace qmrom
