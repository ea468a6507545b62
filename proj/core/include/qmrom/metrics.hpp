#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmrom/integrate.hpp"
#include "qmrom/quad_tensor.hpp"
#include "qmrom/types.hpp"

namespace qmrom {

/// Global mass-weighted relative error
///   sqrt(sum_t du^T M du) / sqrt(sum_t u_ref^T M u_ref)
/// over all saved states. Throws InvalidArgument on mismatched time grids and
/// UndefinedMetric when the reference has zero energy.
double gre_m(const std::vector<double>& test_times, const std::vector<Vector>& test,
             const std::vector<double>& ref_times, const std::vector<Vector>& ref,
             const SparseMatrix& M);
double gre_m(const Trajectory& test, const Trajectory& reference, const SparseMatrix& M);

/// Least-squares coefficients of full-space states on [v_1..v_n, theta_ij (i <= j)].
struct Amplitudes {
  std::vector<double> times;
  Index n = 0;
  Matrix linear;     // T x n, q_i(t)
  Matrix quadratic;  // T x n(n+1)/2, q_ij(t) in packed order
};

/// M-weighted least squares of every state on the stacked raw columns. Throws
/// RankDeficient naming the dependent columns when the stack is numerically
/// rank deficient (relative tolerance 1e-8).
Amplitudes reconstruct_amplitudes(const std::vector<double>& times,
                                  const std::vector<Vector>& states, const Matrix& V,
                                  const QuadTensor& theta, const SparseMatrix& M);

struct CouplingReport {
  std::vector<std::pair<Index, Index>> pairs;  // packed order
  Matrix expected;          // T x pairs, z_i z_j (i < j) or z_i^2 / 2
  Vector discrepancy;       // per pair, in [0, 1]
  Vector weight;            // per pair, |q_ij|^2 + |c_ij|^2
  double score = 0.0;       // weighted mean of the discrepancies
};

/// Compares the derivative amplitudes q_ij with the products of the modal
/// amplitudes that a quadratic manifold would impose.
CouplingReport coupling_report(const Amplitudes& amplitudes);

/// GRE_M table keyed by reduced dof count and method name.
struct ErrorReport {
  struct Cell {
    std::optional<double> value;  // absent for diverged runs
    std::string status = "completed";
    double diverged_at = 0.0;
  };
  std::string scenario;
  double dt = 0.0;
  double t_end = 0.0;
  std::vector<std::string> methods;  // column order
  std::map<Index, std::map<std::string, Cell>> rows;

  void add(Index reduced_dofs, const std::string& method, Cell cell);
  const Cell* find(Index reduced_dofs, const std::string& method) const;
  /// Header `dofs,<method>...`; cells hold the error, "diverged" or are empty.
  void write_csv(std::ostream& out) const;
};

}  // namespace qmrom
