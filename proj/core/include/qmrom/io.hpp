#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qmrom/integrate.hpp"
#include "qmrom/metrics.hpp"
#include "qmrom/types.hpp"

namespace qmrom {

/// Dense matrix container: magic line, provenance comment, dimensions, then
/// the entries column-major, one per line, at full precision.
void write_matrix(std::ostream& out, const Matrix& A, const std::string& provenance);
/// Throws InvalidArgument on a malformed stream.
Matrix read_matrix(std::istream& in, std::string* provenance = nullptr);

/// `row,col,value` lines (0-based), upper and lower triangle alike.
void write_sparse_triplets(std::ostream& out, const SparseMatrix& A);

/// Header `t,z_1,...,z_n`, one row per saved state.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
/// Header `t,<label>`: one full-space dof over time.
void write_probe_csv(std::ostream& out, const Trajectory& trajectory, Index dof,
                     const std::string& label);
/// Header `k,sigma`.
void write_singular_values_csv(std::ostream& out, const Vector& sigma);
/// Header `i,j,discrepancy,weight`, 1-based mode indices, then a `score` line.
void write_coupling_csv(std::ostream& out, const CouplingReport& report);

}  // namespace qmrom
