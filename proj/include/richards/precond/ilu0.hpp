#pragma once

#include "richards/sparse.hpp"

namespace richards {

/// Incomplete LU factorization with zero fill: L (unit lower) and U share
/// the sparsity pattern of A.
class Ilu0 {
 public:
  Ilu0() = default;
  /// Throws std::runtime_error on a zero or missing pivot, naming the row.
  explicit Ilu0(const SparseMatrix& A);

  /// Solves L U z = r.
  Vector solve(const Vector& r) const;
  void solve_in_place(Vector& x) const;

  Eigen::Index size() const { return lu_.rows(); }
  /// Combined factors: strict lower part is L - I, upper part is U.
  const SparseMatrix& factors() const { return lu_; }
  SparseMatrix lower() const;
  SparseMatrix upper() const;

 private:
  SparseMatrix lu_;
  std::vector<int> diag_;  // position of the diagonal in each row
};

}  // namespace richards
