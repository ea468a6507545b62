#include "qmrom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "qmrom/errors.hpp"

namespace qmrom {

double gre_m(const std::vector<double>& test_times, const std::vector<Vector>& test,
             const std::vector<double>& ref_times, const std::vector<Vector>& ref,
             const SparseMatrix& M) {
  if (test_times.size() != ref_times.size() || test.size() != test_times.size() ||
      ref.size() != ref_times.size()) {
    throw InvalidArgument("gre_m: trajectories are sampled on different time grids");
  }
  for (std::size_t k = 0; k < ref_times.size(); ++k) {
    const double scale = std::max(1.0, std::abs(ref_times[k]));
    if (std::abs(test_times[k] - ref_times[k]) > 1e-9 * scale) {
      throw InvalidArgument("gre_m: save times differ at index " + std::to_string(k));
    }
  }
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    if (test[k].size() != M.rows() || ref[k].size() != M.rows()) {
      throw InvalidArgument("gre_m: state length does not match the mass matrix");
    }
    const Vector du = test[k] - ref[k];
    num += du.dot(M * du);
    den += ref[k].dot(M * ref[k]);
  }
  if (!(den > 0.0)) throw UndefinedMetric("gre_m: reference trajectory has zero energy");
  return std::sqrt(std::max(num, 0.0) / den);
}

double gre_m(const Trajectory& test, const Trajectory& reference, const SparseMatrix& M) {
  return gre_m(test.times, test.full, reference.times, reference.full, M);
}

Amplitudes reconstruct_amplitudes(const std::vector<double>& times,
                                  const std::vector<Vector>& states, const Matrix& V,
                                  const QuadTensor& theta, const SparseMatrix& M) {
  const Index n = V.cols();
  const Index N = V.rows();
  if (theta.reduced_size() != n || theta.full_size() != N || M.rows() != N) {
    throw InvalidArgument("reconstruct_amplitudes: inconsistent dimensions");
  }
  if (times.size() != states.size()) {
    throw InvalidArgument("reconstruct_amplitudes: times and states differ in length");
  }
  const Index p = n + QuadTensor::packed_count(n);
  Matrix A(N, p);
  A.leftCols(n) = V;
  A.rightCols(p - n) = theta.packed();

  auto column_name = [&](Index k) {
    if (k < n) return "v_" + std::to_string(k + 1);
    const auto [i, j] = theta.pair_of(k - n);
    return "theta_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
  };

  // M-orthonormal QR by modified Gram-Schmidt with one reorthogonalization pass.
  Matrix Q(N, p), MQ(N, p);
  Matrix R = Matrix::Zero(p, p);
  std::vector<std::string> dependent;
  for (Index k = 0; k < p; ++k) {
    Vector a = A.col(k);
    const double norm0 = std::sqrt(std::max(a.dot(M * a), 0.0));
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < k; ++j) {
        const double r = MQ.col(j).dot(a);
        a -= r * Q.col(j);
        R(j, k) += r;
      }
    }
    const Vector Ma = M * a;
    const double nk = std::sqrt(std::max(a.dot(Ma), 0.0));
    if (!(norm0 > 0.0) || nk <= 1e-8 * norm0) {
      dependent.push_back(column_name(k));
      continue;
    }
    R(k, k) = nk;
    Q.col(k) = a / nk;
    MQ.col(k) = Ma / nk;
  }
  if (!dependent.empty()) {
    std::ostringstream msg;
    msg << "reconstruct_amplitudes: numerically dependent columns:";
    for (const auto& name : dependent) msg << ' ' << name;
    throw RankDeficient(msg.str());
  }

  Amplitudes out;
  out.times = times;
  out.n = n;
  out.linear.resize(static_cast<Index>(states.size()), n);
  out.quadratic.resize(static_cast<Index>(states.size()), p - n);
  const auto Rt = R.triangularView<Eigen::Upper>();
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (states[t].size() != N) throw InvalidArgument("reconstruct_amplitudes: bad state length");
    const Vector c = Rt.solve(Vector(MQ.transpose() * states[t]));
    out.linear.row(static_cast<Index>(t)) = c.head(n).transpose();
    out.quadratic.row(static_cast<Index>(t)) = c.tail(p - n).transpose();
  }
  return out;
}

CouplingReport coupling_report(const Amplitudes& amplitudes) {
  const Index n = amplitudes.n;
  const Index T = amplitudes.linear.rows();
  const Index pc = amplitudes.quadratic.cols();
  CouplingReport report;
  report.expected.resize(T, pc);
  report.discrepancy.resize(pc);
  report.weight.resize(pc);

  double sum_sq = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const Index k = static_cast<Index>(report.pairs.size());
      report.pairs.emplace_back(i, j);
      const auto zi = amplitudes.linear.col(i).array();
      const auto zj = amplitudes.linear.col(j).array();
      report.expected.col(k) = (i == j ? 0.5 : 1.0) * (zi * zj).matrix();
    }
  }
  if (T > 0 && pc > 0) {
    sum_sq = amplitudes.quadratic.squaredNorm() + report.expected.squaredNorm();
  }
  const double rms = T * pc > 0 ? std::sqrt(sum_sq / static_cast<double>(2 * T * pc)) : 0.0;
  const double floor = 1e-12 * rms + std::numeric_limits<double>::min();

  double wsum = 0.0, acc = 0.0;
  for (Index k = 0; k < pc; ++k) {
    const auto q = amplitudes.quadratic.col(k);
    const auto c = report.expected.col(k);
    report.discrepancy[k] = (q - c).norm() / (q.norm() + c.norm() + floor);
    report.weight[k] = q.squaredNorm() + c.squaredNorm();
    wsum += report.weight[k];
    acc += report.weight[k] * report.discrepancy[k];
  }
  report.score = wsum > 0.0 ? acc / wsum : 0.0;
  return report;
}

void ErrorReport::add(Index reduced_dofs, const std::string& method, Cell cell) {
  if (std::find(methods.begin(), methods.end(), method) == methods.end()) {
    methods.push_back(method);
  }
  rows[reduced_dofs][method] = std::move(cell);
}

const ErrorReport::Cell* ErrorReport::find(Index reduced_dofs, const std::string& method) const {
  const auto row = rows.find(reduced_dofs);
  if (row == rows.end()) return nullptr;
  const auto cell = row->second.find(method);
  return cell == row->second.end() ? nullptr : &cell->second;
}

void ErrorReport::write_csv(std::ostream& out) const {
  out << "dofs";
  for (const auto& m : methods) out << ',' << m;
  out << '\n';
  out << std::setprecision(10);
  for (const auto& [dofs, cells] : rows) {
    out << dofs;
    for (const auto& m : methods) {
      out << ',';
      const auto it = cells.find(m);
      if (it == cells.end()) continue;
      if (it->second.value) {
        out << *it->second.value;
      } else {
        out << "diverged";
      }
    }
    out << '\n';
  }
}

}  // namespace qmrom
