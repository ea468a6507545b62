#include "qmrom/io.hpp"

#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "qmrom/errors.hpp"

namespace qmrom {
namespace {

constexpr const char* kMatrixMagic = "qmrom-matrix 1";

struct PrecisionGuard {
  explicit PrecisionGuard(std::ostream& out)
      : out_(out), old_(out.precision(std::numeric_limits<double>::max_digits10)) {}
  ~PrecisionGuard() { out_.precision(old_); }
  std::ostream& out_;
  std::streamsize old_;
};

}  // namespace

void write_matrix(std::ostream& out, const Matrix& A, const std::string& provenance) {
  PrecisionGuard guard(out);
  out << kMatrixMagic << '\n';
  std::istringstream lines(provenance);
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  out << A.rows() << ' ' << A.cols() << '\n';
  for (Index j = 0; j < A.cols(); ++j) {
    for (Index i = 0; i < A.rows(); ++i) out << A(i, j) << '\n';
  }
}

Matrix read_matrix(std::istream& in, std::string* provenance) {
  std::string line;
  if (!std::getline(in, line) || line != kMatrixMagic) {
    throw InvalidArgument("matrix container: bad magic line");
  }
  std::string prov;
  while (in.peek() == '#') {
    std::getline(in, line);
    if (!prov.empty()) prov += '\n';
    prov += line.size() > 2 ? line.substr(2) : std::string();
  }
  Index rows = -1, cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw InvalidArgument("matrix container: bad dimensions");
  }
  Matrix A(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if (!(in >> A(i, j))) throw InvalidArgument("matrix container: truncated data");
    }
  }
  if (provenance) *provenance = std::move(prov);
  return A;
}

void write_sparse_triplets(std::ostream& out, const SparseMatrix& A) {
  PrecisionGuard guard(out);
  out << "row,col,value\n";
  for (Index k = 0; k < A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      out << it.row() << ',' << it.col() << ',' << it.value() << '\n';
    }
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  PrecisionGuard guard(out);
  const Index n = trajectory.reduced.empty() ? 0 : trajectory.reduced.front().size();
  out << 't';
  for (Index i = 0; i < n; ++i) out << ",z_" << i + 1;
  out << '\n';
  for (Index k = 0; k < trajectory.size(); ++k) {
    out << trajectory.times[static_cast<std::size_t>(k)];
    const Vector& z = trajectory.reduced[static_cast<std::size_t>(k)];
    for (Index i = 0; i < z.size(); ++i) out << ',' << z[i];
    out << '\n';
  }
}

void write_probe_csv(std::ostream& out, const Trajectory& trajectory, Index dof,
                     const std::string& label) {
  PrecisionGuard guard(out);
  out << "t," << label << '\n';
  for (Index k = 0; k < trajectory.size(); ++k) {
    const Vector& u = trajectory.full[static_cast<std::size_t>(k)];
    if (dof < 0 || dof >= u.size()) throw InvalidArgument("probe dof out of range");
    out << trajectory.times[static_cast<std::size_t>(k)] << ',' << u[dof] << '\n';
  }
}

void write_singular_values_csv(std::ostream& out, const Vector& sigma) {
  PrecisionGuard guard(out);
  out << "k,sigma\n";
  for (Index k = 0; k < sigma.size(); ++k) out << k + 1 << ',' << sigma[k] << '\n';
}

void write_coupling_csv(std::ostream& out, const CouplingReport& report) {
  PrecisionGuard guard(out);
  out << "i,j,discrepancy,weight\n";
  for (std::size_t k = 0; k < report.pairs.size(); ++k) {
    const auto [i, j] = report.pairs[k];
    const Index kk = static_cast<Index>(k);
    out << i + 1 << ',' << j + 1 << ',' << report.discrepancy[kk] << ',' << report.weight[kk]
        << '\n';
  }
  out << "score,," << report.score << ",\n";
}

}  // namespace qmrom
