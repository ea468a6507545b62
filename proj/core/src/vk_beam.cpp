#include "qmrom/vk_beam.hpp"

#include <array>
#include <cmath>

#include "qmrom/errors.hpp"

namespace qmrom {
namespace {

// 5-point Gauss-Legendre on [0,1]; exact to degree 9.
constexpr std::array<double, 5> kGaussX = {0.04691007703066800, 0.2307653449471585, 0.5,
                                           0.7692346550528415, 0.9530899229693320};
constexpr std::array<double, 5> kGaussW = {0.1184634425280945, 0.2393143352496832,
                                           0.2844444444444444, 0.2393143352496832,
                                           0.1184634425280945};

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec2 = Eigen::Matrix<double, 2, 1>;

struct BeamShape {
  Vec2 Nu, dNu;
  Vec4 H, dH, ddH;
};

BeamShape beam_shape(double s, double le) {
  BeamShape sh;
  sh.Nu << 1.0 - s, s;
  sh.dNu << -1.0 / le, 1.0 / le;
  const double s2 = s * s, s3 = s2 * s;
  sh.H << 1 - 3 * s2 + 2 * s3, le * (s - 2 * s2 + s3), 3 * s2 - 2 * s3, le * (-s2 + s3);
  sh.dH << (-6 * s + 6 * s2) / le, 1 - 4 * s + 3 * s2, (6 * s - 6 * s2) / le, -2 * s + 3 * s2;
  sh.ddH << (-6 + 12 * s) / (le * le), (-4 + 6 * s) / le, (6 - 12 * s) / (le * le),
      (-2 + 6 * s) / le;
  return sh;
}

// Local element order: u1 w1 t1 u2 w2 t2.
constexpr int kU[2] = {0, 3};
constexpr int kW[4] = {1, 2, 4, 5};

}  // namespace

VkBeamModel::VkBeamModel(double length, double height, int n_elements, Material material,
                         bool clamp_both_ends)
    : length_(length), height_(height), n_elements_(n_elements) {
  if (!(length > 0.0) || !(height > 0.0)) throw InvalidArgument("beam dimensions must be positive");
  if (n_elements < 1) throw InvalidArgument("beam needs at least one element");
  material.validate();
  const double area = height * material.thickness;
  axial_rigidity_ = material.youngs_modulus * area;
  bending_rigidity_ = material.youngs_modulus * material.thickness * height * height * height / 12.0;
  mass_per_length_ = material.density * area;

  const Index nn = node_count();
  dof_map_.assign(static_cast<std::size_t>(3 * nn), -1);
  for (Index i = 0; i < nn; ++i) {
    const bool fixed = i == 0 || (clamp_both_ends && i == nn - 1);
    if (fixed) continue;
    for (int c = 0; c < 3; ++c) {
      const Index g = free_dofs_++;
      dof_map_[static_cast<std::size_t>(3 * i + c)] = g;
      (c == axial ? membrane_dofs_ : bending_dofs_).push_back(g);
    }
  }

  std::vector<Eigen::Triplet<double, int>> trips;
  const double le = length_ / n_elements_;
  for (Index e = 0; e < n_elements_; ++e) {
    Eigen::Matrix<double, 6, 6> me = Eigen::Matrix<double, 6, 6>::Zero();
    for (std::size_t q = 0; q < kGaussX.size(); ++q) {
      const auto sh = beam_shape(kGaussX[q], le);
      const double w = kGaussW[q] * le * mass_per_length_;
      const Eigen::Matrix2d muu = w * sh.Nu * sh.Nu.transpose();
      const Eigen::Matrix4d mww = w * sh.H * sh.H.transpose();
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) me(kU[a], kU[b]) += muu(a, b);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) me(kW[a], kW[b]) += mww(a, b);
    }
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) {
        const Index gr = dof_map_[static_cast<std::size_t>(3 * e + r)];
        const Index gc = dof_map_[static_cast<std::size_t>(3 * e + c)];
        if (gr >= 0 && gc >= 0 && me(r, c) != 0.0)
          trips.emplace_back(static_cast<int>(gr), static_cast<int>(gc), me(r, c));
      }
  }
  mass_.resize(free_dofs_, free_dofs_);
  mass_.setFromTriplets(trips.begin(), trips.end());
  load_pattern_ = Vector::Zero(free_dofs_);
}

double VkBeamModel::characteristic_length() const {
  return std::hypot(length_, height_);
}

void VkBeamModel::sweep(const Vector& u, Vector* f, SparseMatrix* K) const {
  if (u.size() != free_dofs_) throw InvalidArgument("displacement has wrong length");
  require_finite(u, "displacement");
  const double le = length_ / n_elements_;
  const double EA = axial_rigidity_, EI = bending_rigidity_;
  if (f) f->setZero(free_dofs_);
  std::vector<Eigen::Triplet<double, int>> trips;
  if (K) trips.reserve(static_cast<std::size_t>(36 * n_elements_));

  for (Index e = 0; e < n_elements_; ++e) {
    Eigen::Matrix<double, 6, 1> ue;
    for (int r = 0; r < 6; ++r) {
      const Index g = dof_map_[static_cast<std::size_t>(3 * e + r)];
      ue[r] = g >= 0 ? u[g] : 0.0;
    }
    const Vec2 ua(ue[kU[0]], ue[kU[1]]);
    const Vec4 wa(ue[kW[0]], ue[kW[1]], ue[kW[2]], ue[kW[3]]);

    Eigen::Matrix<double, 6, 1> fe = Eigen::Matrix<double, 6, 1>::Zero();
    Eigen::Matrix<double, 6, 6> ke = Eigen::Matrix<double, 6, 6>::Zero();
    for (std::size_t q = 0; q < kGaussX.size(); ++q) {
      const auto sh = beam_shape(kGaussX[q], le);
      const double w = kGaussW[q] * le;
      const double up = sh.dNu.dot(ua);
      const double wp = sh.dH.dot(wa);
      const double wpp = sh.ddH.dot(wa);
      const double N = EA * (up + 0.5 * wp * wp);
      const double Mb = EI * wpp;
      if (f) {
        for (int a = 0; a < 2; ++a) fe[kU[a]] += w * N * sh.dNu[a];
        for (int a = 0; a < 4; ++a) fe[kW[a]] += w * (N * wp * sh.dH[a] + Mb * sh.ddH[a]);
      }
      if (K) {
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) ke(kU[a], kU[b]) += w * EA * sh.dNu[a] * sh.dNu[b];
          for (int b = 0; b < 4; ++b) {
            const double kuw = w * EA * wp * sh.dNu[a] * sh.dH[b];
            ke(kU[a], kW[b]) += kuw;
            ke(kW[b], kU[a]) += kuw;
          }
        }
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            ke(kW[a], kW[b]) += w * ((EA * wp * wp + N) * sh.dH[a] * sh.dH[b] +
                                     EI * sh.ddH[a] * sh.ddH[b]);
      }
    }

    for (int r = 0; r < 6; ++r) {
      const Index gr = dof_map_[static_cast<std::size_t>(3 * e + r)];
      if (gr < 0) continue;
      if (f) (*f)[gr] += fe[r];
      if (K)
        for (int c = 0; c < 6; ++c) {
          const Index gc = dof_map_[static_cast<std::size_t>(3 * e + c)];
          if (gc >= 0) trips.emplace_back(static_cast<int>(gr), static_cast<int>(gc), ke(r, c));
        }
    }
  }
  if (K) {
    K->resize(free_dofs_, free_dofs_);
    K->setFromTriplets(trips.begin(), trips.end());
  }
}

Vector VkBeamModel::internal_force(const Vector& u) const {
  Vector f;
  sweep(u, &f, nullptr);
  return f;
}

SparseMatrix VkBeamModel::stiffness(const Vector& u) const {
  SparseMatrix K;
  sweep(u, nullptr, &K);
  return K;
}

void VkBeamModel::force_and_stiffness(const Vector& u, Vector& f, SparseMatrix& K) const {
  sweep(u, &f, &K);
}

Vector VkBeamModel::distributed_load(double q) const {
  const double le = length_ / n_elements_;
  const double local[6] = {0.0, q * le / 2, q * le * le / 12, 0.0, q * le / 2, -q * le * le / 12};
  Vector F = Vector::Zero(free_dofs_);
  for (Index e = 0; e < n_elements_; ++e)
    for (int r = 0; r < 6; ++r) {
      const Index g = dof_map_[static_cast<std::size_t>(3 * e + r)];
      if (g >= 0) F[g] += local[r];
    }
  return F;
}

VkBeamModel vk_beam_model(double length, double height, int n_elements, const Material& material) {
  return VkBeamModel(length, height, n_elements, material, true);
}

}  // namespace qmrom
