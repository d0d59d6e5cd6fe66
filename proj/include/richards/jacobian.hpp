#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "richards/residual.hpp"
#include "richards/sparse.hpp"

namespace richards {

/// Which terms of the linearized operator to assemble.
enum class JacobianTerms {
  kFull,           // time + diffusion + gravity
  kDiffusionOnly,  // drop every z-gravity contribution
  kGravityOnly,    // only the +-K'/(2 h_z) transport couplings
};

struct JacobianMatrix {
  SparseMatrix matrix;
  AverageKind average = AverageKind::kArithmetic;
  /// Time step and Newton iterate the matrix was evaluated at (-1 = unset).
  int step = -1;
  int iterate = -1;
};

/// 7-point (3D) or 3-point (1D) stencil adjacency over interior dofs, with
/// explicit zero values. Couplings to boundary nodes are eliminated.
SparseMatrix stencil_pattern(const Discretization& disc);

/// Closed-form Jacobian of Phi for arithmetic and upstream averages.
/// Throws std::invalid_argument for the other averages.
SparseMatrix assemble(const Discretization& disc, const Field& p,
                      JacobianTerms terms = JacobianTerms::kFull);

JacobianMatrix assemble_1d(const Field& p, const ProblemGrid& grid,
                           const BoundarySpec& spec,
                           const VanGenuchtenParams& params, AverageKind kind);
JacobianMatrix assemble_3d(const Field& p, const ProblemGrid& grid,
                           const BoundarySpec& spec,
                           const VanGenuchtenParams& params, AverageKind kind);

/// Jacobian of the pure-diffusion operator (flux q = -K grad p): the full
/// Jacobian with every gravity-derived term removed.
SparseMatrix diffusion_preconditioner_matrix(const Discretization& disc,
                                             const Field& p);
SparseMatrix diffusion_preconditioner_matrix(const Field& p,
                                             const ProblemGrid& grid,
                                             const BoundarySpec& spec,
                                             const VanGenuchtenParams& params,
                                             AverageKind kind);

/// The z-transport part G of the Jacobian; J = diffusion + G.
SparseMatrix gravity_matrix(const Discretization& disc, const Field& p);

/// Analytic Jacobian when available, otherwise the coloured central
/// difference Jacobian of disc.residual.
SparseMatrix jacobian(const Discretization& disc, const Field& p);

/// Central-difference step for component m.
inline double fd_step(double pm) { return std::max(1e-7 * std::abs(pm), 1e-9); }

/// Greedy distance-2 colouring of the columns of a structurally symmetric
/// pattern: columns of equal colour never share a row.
std::vector<int> column_colouring(const SparseMatrix& pattern, int* colour_count);

/// Central-difference Jacobian of F at p restricted to `pattern`. F maps
/// VectorX<Scalar> -> VectorX<Scalar>, so the oracle may run in extended
/// precision.
template <typename Scalar, typename Evaluator>
SparseMatrix fd_jacobian(const Field& p, Evaluator&& F,
                         const SparseMatrix& pattern) {
  const Eigen::Index n = p.size();
  if (pattern.rows() != n || pattern.cols() != n)
    throw std::invalid_argument("fd_jacobian: pattern size mismatch");
  int ncolours = 0;
  const std::vector<int> colour = column_colouring(pattern, &ncolours);
  const SparseMatrix by_column = pattern.transpose();  // row j = column j

  SparseMatrix J = pattern;
  const VectorX<Scalar> base = p.cast<Scalar>();
  for (int c = 0; c < ncolours; ++c) {
    VectorX<Scalar> plus = base, minus = base;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (colour[j] != c) continue;
      const Scalar step = Scalar(fd_step(p[j]));
      plus[j] += step;
      minus[j] -= step;
    }
    const VectorX<Scalar> fp = F(plus);
    const VectorX<Scalar> fm = F(minus);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (colour[j] != c) continue;
      const Scalar width = plus[j] - minus[j];
      for (SparseMatrix::InnerIterator it(by_column, j); it; ++it) {
        const Eigen::Index i = it.col();
        J.coeffRef(i, j) = static_cast<double>((fp[i] - fm[i]) / width);
      }
    }
  }
  return J;
}

/// Column-by-column central differences with no sparsity assumption;
/// exact zeros are dropped from the result.
template <typename Scalar, typename Evaluator>
SparseMatrix fd_jacobian(const Field& p, Evaluator&& F) {
  const Eigen::Index n = p.size();
  std::vector<Eigen::Triplet<double, int>> entries;
  const VectorX<Scalar> base = p.cast<Scalar>();
  for (Eigen::Index j = 0; j < n; ++j) {
    VectorX<Scalar> plus = base, minus = base;
    const Scalar step = Scalar(fd_step(p[j]));
    plus[j] += step;
    minus[j] -= step;
    const VectorX<Scalar> column = (F(plus) - F(minus)) / (plus[j] - minus[j]);
    if (column.size() != n)
      throw std::invalid_argument("fd_jacobian: evaluator changed the dimension");
    for (Eigen::Index i = 0; i < n; ++i)
      if (column[i] != Scalar(0))
        entries.emplace_back(static_cast<int>(i), static_cast<int>(j),
                             static_cast<double>(column[i]));
  }
  SparseMatrix J(n, n);
  J.setFromTriplets(entries.begin(), entries.end());
  J.makeCompressed();
  return J;
}

}  // namespace richards
