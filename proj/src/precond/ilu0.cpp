#include "richards/precond/ilu0.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace richards {

Ilu0::Ilu0(const SparseMatrix& A) : lu_(A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("ilu0: matrix is not square");
  lu_.makeCompressed();
  const int n = static_cast<int>(lu_.rows());
  const int* ptr = lu_.outerIndexPtr();
  const int* col = lu_.innerIndexPtr();
  double* val = lu_.valuePtr();
  diag_.assign(n, -1);
  for (int i = 0; i < n; ++i)
    for (int q = ptr[i]; q < ptr[i + 1]; ++q)
      if (col[q] == i) diag_[i] = q;

  std::vector<int> where(n, -1);  // column -> position in the current row
  for (int i = 0; i < n; ++i) {
    if (diag_[i] < 0)
      throw std::runtime_error("ilu0: missing diagonal in row " + std::to_string(i));
    for (int q = ptr[i]; q < ptr[i + 1]; ++q) where[col[q]] = q;
    for (int q = ptr[i]; q < ptr[i + 1] && col[q] < i; ++q) {
      const int k = col[q];
      val[q] /= val[diag_[k]];
      const double factor = val[q];
      for (int t = diag_[k] + 1; t < ptr[k + 1]; ++t) {
        const int pos = where[col[t]];
        if (pos >= 0) val[pos] -= factor * val[t];
      }
    }
    for (int q = ptr[i]; q < ptr[i + 1]; ++q) where[col[q]] = -1;
    if (val[diag_[i]] == 0.0)
      throw std::runtime_error("ilu0: zero pivot in row " + std::to_string(i));
  }
}

void Ilu0::solve_in_place(Vector& x) const {
  if (x.size() != lu_.rows()) throw std::invalid_argument("ilu0: dimension mismatch");
  const int n = static_cast<int>(lu_.rows());
  const int* ptr = lu_.outerIndexPtr();
  const int* col = lu_.innerIndexPtr();
  const double* val = lu_.valuePtr();
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    for (int q = ptr[i]; q < diag_[i]; ++q) s -= val[q] * x[col[q]];
    x[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int q = diag_[i] + 1; q < ptr[i + 1]; ++q) s -= val[q] * x[col[q]];
    x[i] = s / val[diag_[i]];
  }
}

Vector Ilu0::solve(const Vector& r) const {
  Vector x = r;
  solve_in_place(x);
  return x;
}

SparseMatrix Ilu0::lower() const {
  SparseMatrix L = lu_.triangularView<Eigen::StrictlyLower>();
  L += identity_matrix(lu_.rows());
  L.makeCompressed();
  return L;
}

SparseMatrix Ilu0::upper() const {
  SparseMatrix U = lu_.triangularView<Eigen::Upper>();
  U.makeCompressed();
  return U;
}

}  // namespace richards
