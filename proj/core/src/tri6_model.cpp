#include <algorithm>
#include <cmath>

#include "qmrom/errors.hpp"
#include "qmrom/fem.hpp"

namespace qmrom {
namespace {

// Degree-4 exact symmetric rule on the reference triangle (area 1/2).
struct RefPoint {
  double xi, eta, weight;
};

constexpr double kA = 0.445948490915965;
constexpr double kB = 0.091576213509771;
constexpr double kWA = 0.223381589678011 * 0.5;
constexpr double kWB = 0.109951743655322 * 0.5;

constexpr RefPoint kRule[6] = {
    {kA, kA, kWA}, {1.0 - 2.0 * kA, kA, kWA}, {kA, 1.0 - 2.0 * kA, kWA},
    {kB, kB, kWB}, {1.0 - 2.0 * kB, kB, kWB}, {kB, 1.0 - 2.0 * kB, kWB},
};

void shape(double xi, double eta, Eigen::Matrix<double, 6, 1>& N,
           Eigen::Matrix<double, 6, 2>& dN) {
  const double L1 = 1.0 - xi - eta, L2 = xi, L3 = eta;
  N << L1 * (2 * L1 - 1), L2 * (2 * L2 - 1), L3 * (2 * L3 - 1), 4 * L1 * L2, 4 * L2 * L3,
      4 * L3 * L1;
  dN << -(4 * L1 - 1), -(4 * L1 - 1),
        4 * L2 - 1, 0.0,
        0.0, 4 * L3 - 1,
        4 * (L1 - L2), -4 * L2,
        4 * L3, 4 * L2,
        -4 * L3, 4 * (L1 - L3);
}

Eigen::Matrix3d plane_stress(const Material& m) {
  const double c = m.youngs_modulus / (1.0 - m.poisson_ratio * m.poisson_ratio);
  Eigen::Matrix3d D;
  D << c, c * m.poisson_ratio, 0.0,
       c * m.poisson_ratio, c, 0.0,
       0.0, 0.0, c * 0.5 * (1.0 - m.poisson_ratio);
  return D;
}

}  // namespace

FEModel::FEModel(Mesh mesh, Material material, const std::vector<std::string>& clamped_sets)
    : mesh_(std::move(mesh)), material_(material) {
  material_.validate();
  for (const auto& el : mesh_.elements)
    for (Index id : el)
      if (id < 0 || id >= mesh_.node_count())
        throw InvalidArgument("element references node " + std::to_string(id) + " out of range");

  const Index nn = mesh_.node_count();
  std::vector<bool> fixed(static_cast<std::size_t>(nn), false);
  for (const auto& name : clamped_sets)
    for (Index id : select_nodes(mesh_, name)) fixed[static_cast<std::size_t>(id)] = true;

  dof_map_.assign(static_cast<std::size_t>(2 * nn), -1);
  for (Index i = 0; i < nn; ++i) {
    if (fixed[static_cast<std::size_t>(i)]) continue;
    dof_map_[static_cast<std::size_t>(2 * i)] = free_dofs_++;
    dof_map_[static_cast<std::size_t>(2 * i + 1)] = free_dofs_++;
  }

  const Index ne = mesh_.element_count();
  element_dofs_.resize(static_cast<std::size_t>(ne));
  qp_.resize(static_cast<std::size_t>(6 * ne));
  for (Index e = 0; e < ne; ++e) {
    const auto& el = mesh_.elements[static_cast<std::size_t>(e)];
    Eigen::Matrix<double, 6, 2> X;
    for (int a = 0; a < 6; ++a) {
      X.row(a) = mesh_.nodes[static_cast<std::size_t>(el[static_cast<std::size_t>(a)])].transpose();
      element_dofs_[static_cast<std::size_t>(e)][static_cast<std::size_t>(2 * a)] = dof(el[static_cast<std::size_t>(a)], 0);
      element_dofs_[static_cast<std::size_t>(e)][static_cast<std::size_t>(2 * a + 1)] = dof(el[static_cast<std::size_t>(a)], 1);
    }
    for (int q = 0; q < 6; ++q) {
      Eigen::Matrix<double, 6, 1> N;
      Eigen::Matrix<double, 6, 2> dNref;
      shape(kRule[q].xi, kRule[q].eta, N, dNref);
      const Eigen::Matrix2d J = X.transpose() * dNref;  // dX/dxi
      const double det = J.determinant();
      if (!(det > 0.0) || !std::isfinite(det))
        throw AssemblyError("element " + std::to_string(e) + " has a degenerate Jacobian", e);
      auto& point = qp_[static_cast<std::size_t>(6 * e + q)];
      point.N = N;
      point.dN = dNref * J.inverse();
      point.weight = kRule[q].weight * det * material_.thickness;
    }
  }
  mesh_.validate();

  // Sparsity pattern and per-element scatter map.
  std::vector<Eigen::Triplet<double, int>> trips;
  trips.reserve(static_cast<std::size_t>(ne) * 144);
  for (const auto& dofs : element_dofs_)
    for (Index r : dofs)
      for (Index c : dofs)
        if (r >= 0 && c >= 0) trips.emplace_back(static_cast<int>(r), static_cast<int>(c), 0.0);
  pattern_.resize(free_dofs_, free_dofs_);
  pattern_.setFromTriplets(trips.begin(), trips.end());
  pattern_.makeCompressed();

  scatter_.resize(static_cast<std::size_t>(ne));
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  for (Index e = 0; e < ne; ++e) {
    const auto& dofs = element_dofs_[static_cast<std::size_t>(e)];
    auto& map = scatter_[static_cast<std::size_t>(e)];
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 12; ++c) {
        const Index gr = dofs[static_cast<std::size_t>(r)], gc = dofs[static_cast<std::size_t>(c)];
        int slot = -1;
        if (gr >= 0 && gc >= 0) {
          const int* begin = inner + outer[gc];
          const int* end = inner + outer[gc + 1];
          slot = static_cast<int>(std::lower_bound(begin, end, static_cast<int>(gr)) - inner);
        }
        map[static_cast<std::size_t>(12 * c + r)] = slot;
      }
  }

  // Consistent mass.
  mass_ = pattern_;
  double* mv = mass_.valuePtr();
  for (Index e = 0; e < ne; ++e) {
    Eigen::Matrix<double, 6, 6> me = Eigen::Matrix<double, 6, 6>::Zero();
    for (int q = 0; q < 6; ++q) {
      const auto& point = qp_[static_cast<std::size_t>(6 * e + q)];
      me.noalias() += (material_.density * point.weight) * point.N * point.N.transpose();
    }
    const auto& map = scatter_[static_cast<std::size_t>(e)];
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int c = 0; c < 2; ++c) {
          const int slot = map[static_cast<std::size_t>(12 * (2 * b + c) + 2 * a + c)];
          if (slot >= 0) mv[slot] += me(a, b);
        }
  }
  mass_.prune(0.0);

  load_pattern_ = Vector::Zero(free_dofs_);
}

void FEModel::element_sweep(const Vector& u, Vector* f, SparseMatrix* K) const {
  if (u.size() != free_dofs_) throw InvalidArgument("displacement has wrong length");
  require_finite(u, "displacement");
  const Eigen::Matrix3d D = plane_stress(material_);
  if (f) f->setZero(free_dofs_);
  double* kv = nullptr;
  if (K) {
    *K = pattern_;
    kv = K->valuePtr();
  }

  const Index ne = mesh_.element_count();
  for (Index e = 0; e < ne; ++e) {
    const auto& dofs = element_dofs_[static_cast<std::size_t>(e)];
    Eigen::Matrix<double, 6, 2> ue;
    for (int a = 0; a < 6; ++a)
      for (int c = 0; c < 2; ++c) {
        const Index g = dofs[static_cast<std::size_t>(2 * a + c)];
        ue(a, c) = g >= 0 ? u[g] : 0.0;
      }

    Eigen::Matrix<double, 12, 1> fe = Eigen::Matrix<double, 12, 1>::Zero();
    Eigen::Matrix<double, 12, 12> ke = Eigen::Matrix<double, 12, 12>::Zero();
    for (int q = 0; q < 6; ++q) {
      const auto& point = qp_[static_cast<std::size_t>(6 * e + q)];
      const Eigen::Matrix2d H = ue.transpose() * point.dN;  // du_i/dX_j
      const Eigen::Matrix2d F = Eigen::Matrix2d::Identity() + H;
      const Eigen::Matrix2d E = 0.5 * (H + H.transpose() + H.transpose() * H);
      const Eigen::Vector3d strain(E(0, 0), E(1, 1), 2.0 * E(0, 1));
      const Eigen::Vector3d S = D * strain;

      Eigen::Matrix<double, 3, 12> B;
      for (int a = 0; a < 6; ++a) {
        const double dx = point.dN(a, 0), dy = point.dN(a, 1);
        for (int c = 0; c < 2; ++c) {
          B(0, 2 * a + c) = F(c, 0) * dx;
          B(1, 2 * a + c) = F(c, 1) * dy;
          B(2, 2 * a + c) = F(c, 0) * dy + F(c, 1) * dx;
        }
      }
      if (f) fe.noalias() += point.weight * B.transpose() * S;
      if (K) {
        ke.noalias() += point.weight * B.transpose() * (D * B);
        Eigen::Matrix2d Smat;
        Smat << S(0), S(2), S(2), S(1);
        const Eigen::Matrix<double, 6, 6> G = point.dN * Smat * point.dN.transpose();
        for (int a = 0; a < 6; ++a)
          for (int b = 0; b < 6; ++b) {
            ke(2 * a, 2 * b) += point.weight * G(a, b);
            ke(2 * a + 1, 2 * b + 1) += point.weight * G(a, b);
          }
      }
    }

    if (f)
      for (int r = 0; r < 12; ++r) {
        const Index g = dofs[static_cast<std::size_t>(r)];
        if (g >= 0) (*f)[g] += fe[r];
      }
    if (K) {
      const auto& map = scatter_[static_cast<std::size_t>(e)];
      for (int c = 0; c < 12; ++c)
        for (int r = 0; r < 12; ++r) {
          const int slot = map[static_cast<std::size_t>(12 * c + r)];
          if (slot >= 0) kv[slot] += 0.5 * (ke(r, c) + ke(c, r));
        }
    }
  }
}

Vector FEModel::internal_force(const Vector& u) const {
  Vector f;
  element_sweep(u, &f, nullptr);
  return f;
}

SparseMatrix FEModel::stiffness(const Vector& u) const {
  SparseMatrix K;
  element_sweep(u, nullptr, &K);
  return K;
}

void FEModel::force_and_stiffness(const Vector& u, Vector& f, SparseMatrix& K) const {
  element_sweep(u, &f, &K);
}

void FEModel::set_rayleigh_damping(double mass_factor, double stiffness_factor) {
  if (mass_factor == 0.0 && stiffness_factor == 0.0) {
    damping_ = SparseMatrix();
    return;
  }
  damping_ = mass_factor * mass_ + stiffness_factor * stiffness(Vector::Zero(free_dofs_));
}

Vector FEModel::expand(const Vector& u) const {
  Vector full = Vector::Zero(2 * mesh_.node_count());
  for (std::size_t k = 0; k < dof_map_.size(); ++k)
    if (dof_map_[k] >= 0) full[static_cast<Index>(k)] = u[dof_map_[k]];
  return full;
}

Vector FEModel::assemble_load_pattern(const std::string& edge_set, double traction,
                                      const Point2& direction) const {
  const auto it = mesh_.edge_sets.find(edge_set);
  if (it == mesh_.edge_sets.end()) throw NotFound("unknown edge set '" + edge_set + "'");
  if (it->second.empty()) throw InvalidArgument("edge set '" + edge_set + "' is empty");
  if (!(direction.norm() > 0.0)) throw InvalidArgument("load direction must be non-zero");
  const Point2 dir = direction.normalized();
  constexpr double weights[3] = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};

  Vector F = Vector::Zero(free_dofs_);
  for (const auto& edge : it->second) {
    const double length = (mesh_.nodes[static_cast<std::size_t>(edge.nodes[2])] -
                           mesh_.nodes[static_cast<std::size_t>(edge.nodes[0])]).norm();
    for (int k = 0; k < 3; ++k)
      for (int c = 0; c < 2; ++c) {
        const Index g = dof(edge.nodes[static_cast<std::size_t>(k)], c);
        if (g >= 0) F[g] += weights[k] * traction * length * dir[c];
      }
  }
  return F;
}

}  // namespace qmrom
