#pragma once

#include <vector>

#include "richards/grid.hpp"
#include "richards/precond/ilu0.hpp"

namespace richards {

/// Non-overlapping core blocks and their overlapped index sets.
struct SubdomainPartition {
  std::vector<int> owner;                       // core block of each dof
  std::vector<std::vector<int>> cores;          // sorted dofs per block
  std::vector<std::vector<int>> overlapped;     // cores dilated `overlap` times
  int overlap = 0;

  int blocks() const { return static_cast<int>(cores.size()); }
};

/// `blocks` contiguous index ranges of near-equal length.
SubdomainPartition contiguous_partition(Eigen::Index n, int blocks);

/// Box grids: the interior is cut into bx * by vertical columns of nodes
/// (every z level stays in its column's block). Line grids fall back to
/// contiguous ranges along z.
SubdomainPartition grid_partition(const ProblemGrid& grid, int bx, int by);

/// Adds `layers` rings of graph neighbours (in the pattern of A) around each
/// core block.
SubdomainPartition with_overlap(SubdomainPartition partition,
                                const SparseMatrix& A, int layers);

/// One-level additive Schwarz: M^{-1} = sum_i P_i ILU0(R_i A P_i)^{-1} R_i.
/// Zero overlap is block-Jacobi with ILU(0) blocks.
class AdditiveSchwarz {
 public:
  AdditiveSchwarz(const SparseMatrix& A, SubdomainPartition partition);

  Vector apply(const Vector& r) const;
  /// Refactors the local blocks of a matrix with the same dimension.
  void update(const SparseMatrix& A);

  const SubdomainPartition& partition() const { return partition_; }

 private:
  SubdomainPartition partition_;
  std::vector<Ilu0> local_;
  Eigen::Index n_ = 0;
};

/// R_i A P_i for a sorted index set.
SparseMatrix principal_submatrix(const SparseMatrix& A, const std::vector<int>& index);

}  // namespace richards
