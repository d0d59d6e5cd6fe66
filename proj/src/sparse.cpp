#include "richards/sparse.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace richards {

Vector spmv(const SparseMatrix& A, const Vector& x) {
  if (A.cols() != x.size())
    throw std::invalid_argument("spmv: dimension mismatch");
  return A * x;
}

SparseMatrix triple_product(const SparseMatrix& P, const SparseMatrix& A) {
  if (A.rows() != A.cols() || P.rows() != A.rows())
    throw std::invalid_argument("triple_product: dimension mismatch");
  SparseMatrix AP = A * P;
  SparseMatrix PT = P.transpose();
  SparseMatrix C = PT * AP;
  C.makeCompressed();
  return C;
}

bool same_pattern(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) return false;
  if (A.nonZeros() != B.nonZeros()) return false;
  if (!A.isCompressed() || !B.isCompressed()) return false;
  for (Eigen::Index r = 0; r <= A.rows(); ++r)
    if (A.outerIndexPtr()[r] != B.outerIndexPtr()[r]) return false;
  for (Eigen::Index e = 0; e < A.nonZeros(); ++e)
    if (A.innerIndexPtr()[e] != B.innerIndexPtr()[e]) return false;
  return true;
}

bool is_well_formed(const SparseMatrix& A) {
  if (!A.isCompressed()) return false;
  const int* off = A.outerIndexPtr();
  const int* col = A.innerIndexPtr();
  if (off[0] != 0 || off[A.rows()] != A.nonZeros()) return false;
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    if (off[r + 1] < off[r]) return false;
    for (int e = off[r]; e < off[r + 1]; ++e) {
      if (col[e] < 0 || col[e] >= A.cols()) return false;
      if (e > off[r] && col[e] <= col[e - 1]) return false;
    }
  }
  return true;
}

SparseMatrix identity_matrix(Eigen::Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  I.makeCompressed();
  return I;
}

void write_matrix_market(std::ostream& os, const SparseMatrix& A,
                         const std::string& comment) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) os << "% " << line << '\n';
  }
  os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

void write_matrix_market(const std::string& path, const SparseMatrix& A,
                         const std::string& comment) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_matrix_market(os, A, comment);
}

SparseMatrix read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::runtime_error("matrix market: missing banner");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (object != "matrix" || format != "coordinate")
    throw std::runtime_error("matrix market: only coordinate matrices are supported");
  if (field != "real" && field != "integer")
    throw std::runtime_error("matrix market: unsupported field '" + field + "'");
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
    throw std::runtime_error("matrix market: unsupported symmetry '" + symmetry + "'");

  while (std::getline(is, line))
    if (!line.empty() && line[0] != '%') break;
  std::istringstream header(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(header >> rows >> cols >> nnz))
    throw std::runtime_error("matrix market: bad size line");

  std::vector<Eigen::Triplet<double, int>> entries;
  entries.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
  for (long e = 0; e < nnz; ++e) {
    long r = 0, c = 0;
    double v = 0.0;
    if (!(is >> r >> c >> v))
      throw std::runtime_error("matrix market: truncated entry list");
    if (r < 1 || r > rows || c < 1 || c > cols)
      throw std::runtime_error("matrix market: entry index out of range");
    entries.emplace_back(static_cast<int>(r - 1), static_cast<int>(c - 1), v);
    if (symmetric && r != c)
      entries.emplace_back(static_cast<int>(c - 1), static_cast<int>(r - 1), v);
  }
  SparseMatrix A(rows, cols);
  A.setFromTriplets(entries.begin(), entries.end());
  A.makeCompressed();
  return A;
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_matrix_market(is);
}

void write_vector(std::ostream& os, const Vector& v) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << v[i] << '\n';
}

Vector read_vector(std::istream& is) {
  std::vector<double> values;
  double x = 0.0;
  while (is >> x) values.push_back(x);
  if (!is.eof()) throw std::runtime_error("vector: malformed value");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace richards
