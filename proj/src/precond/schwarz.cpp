#include "richards/precond/schwarz.hpp"

#include <algorithm>
#include <stdexcept>

namespace richards {

SubdomainPartition contiguous_partition(Eigen::Index n, int blocks) {
  if (blocks < 1 || blocks > n)
    throw std::invalid_argument("partition: block count must be in [1, n]");
  SubdomainPartition part;
  part.owner.resize(n);
  part.cores.resize(blocks);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int b = static_cast<int>(i * blocks / n);
    part.owner[i] = b;
    part.cores[b].push_back(static_cast<int>(i));
  }
  part.overlapped = part.cores;
  return part;
}

SubdomainPartition grid_partition(const ProblemGrid& grid, int bx, int by) {
  if (grid.is_line()) return contiguous_partition(grid.size(), bx * by);
  const auto m = grid.interior();
  if (bx < 1 || by < 1 || bx > m[0] || by > m[1])
    throw std::invalid_argument("partition: block counts exceed the interior grid");
  SubdomainPartition part;
  part.owner.resize(grid.size());
  part.cores.resize(bx * by);
  for (Eigen::Index idx = 0; idx < grid.size(); ++idx) {
    const auto node = grid.node_of(idx);
    const int cx = (node[0] - 1) * bx / m[0];
    const int cy = (node[1] - 1) * by / m[1];
    const int b = cy * bx + cx;
    part.owner[idx] = b;
    part.cores[b].push_back(static_cast<int>(idx));
  }
  part.overlapped = part.cores;
  return part;
}

SubdomainPartition with_overlap(SubdomainPartition part, const SparseMatrix& A,
                                int layers) {
  if (layers < 0) throw std::invalid_argument("partition: overlap must be >= 0");
  if (static_cast<Eigen::Index>(part.owner.size()) != A.rows())
    throw std::invalid_argument("partition: size does not match the matrix");
  std::vector<char> in(A.rows(), 0);
  for (std::size_t b = 0; b < part.cores.size(); ++b) {
    std::vector<int> set = part.cores[b];
    for (int v : set) in[v] = 1;
    std::vector<int> frontier = set;
    for (int layer = 0; layer < layers; ++layer) {
      std::vector<int> next;
      for (int v : frontier)
        for (SparseMatrix::InnerIterator it(A, v); it; ++it) {
          const int c = static_cast<int>(it.col());
          if (!in[c]) {
            in[c] = 1;
            next.push_back(c);
          }
        }
      set.insert(set.end(), next.begin(), next.end());
      frontier = std::move(next);
    }
    for (int v : set) in[v] = 0;
    std::sort(set.begin(), set.end());
    part.overlapped[b] = std::move(set);
  }
  part.overlap = layers;
  return part;
}

SparseMatrix principal_submatrix(const SparseMatrix& A, const std::vector<int>& index) {
  std::vector<int> local(A.cols(), -1);
  for (std::size_t i = 0; i < index.size(); ++i) local[index[i]] = static_cast<int>(i);
  const int n = static_cast<int>(index.size());
  SparseMatrix S(n, n);
  std::vector<int> counts(n);
  for (int i = 0; i < n; ++i) {
    int c = 0;
    for (SparseMatrix::InnerIterator it(A, index[i]); it; ++it)
      if (local[it.col()] >= 0) ++c;
    counts[i] = c;
  }
  S.reserve(counts);
  for (int i = 0; i < n; ++i)
    for (SparseMatrix::InnerIterator it(A, index[i]); it; ++it) {
      const int j = local[it.col()];
      if (j >= 0) S.insert(i, j) = it.value();  // columns arrive sorted
    }
  S.makeCompressed();
  return S;
}

AdditiveSchwarz::AdditiveSchwarz(const SparseMatrix& A, SubdomainPartition partition)
    : partition_(std::move(partition)) {
  update(A);
}

void AdditiveSchwarz::update(const SparseMatrix& A) {
  if (A.rows() != A.cols() ||
      static_cast<Eigen::Index>(partition_.owner.size()) != A.rows())
    throw std::invalid_argument("additive schwarz: dimension mismatch");
  n_ = A.rows();
  local_.clear();
  for (const auto& set : partition_.overlapped)
    local_.emplace_back(principal_submatrix(A, set));
}

Vector AdditiveSchwarz::apply(const Vector& r) const {
  if (r.size() != n_) throw std::invalid_argument("additive schwarz: dimension mismatch");
  Vector z = Vector::Zero(n_);
  for (std::size_t b = 0; b < local_.size(); ++b) {
    const auto& set = partition_.overlapped[b];
    Vector local(static_cast<Eigen::Index>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i) local[i] = r[set[i]];
    local_[b].solve_in_place(local);
    for (std::size_t i = 0; i < set.size(); ++i) z[set[i]] += local[i];
  }
  return z;
}

}  // namespace richards
