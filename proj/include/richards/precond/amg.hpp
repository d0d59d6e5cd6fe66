#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "richards/krylov.hpp"
#include "richards/precond/schwarz.hpp"

namespace richards {

/// Disjoint aggregates: aggregate[i] is the coarse dof owning fine dof i.
struct AggregationMap {
  std::vector<int> aggregate;
  int count = 0;

  std::vector<int> sizes() const;
};

/// Strength of connection |a_ij| > theta sqrt(a_ii a_jj).
bool strongly_coupled(double aij, double aii, double ajj, double theta);

/// Greedy smoothed-aggregation coarsening over the strength graph. Pass 1
/// visits dofs by decreasing strong degree and seeds an aggregate from a dof
/// whose strong neighbourhood is still free; pass 2 attaches leftovers to the
/// aggregate of their strongest aggregated neighbour; pass 3 makes
/// singletons of whatever remains.
AggregationMap vmb_aggregate(const SparseMatrix& A, double theta = 0.08);

/// Three rounds of greedy pairwise matching on the weights
/// w_ij = 1 - 2 a_ij / (a_ii + a_jj), each round on the Galerkin matrix of the
/// previous one. Aggregates hold at most 2^rounds dofs.
AggregationMap matching_aggregate(const SparseMatrix& A, int max_size = 8);

/// Piecewise-constant prolongator of an aggregation.
SparseMatrix tentative_prolongator(const AggregationMap& agg);

/// rho(D^{-1} A) estimated by power iteration from a fixed start vector.
double jacobi_spectral_radius(const SparseMatrix& A, int iterations = 20);

/// (I - omega D^{-1} A) P with omega = 4 / (3 rho(D^{-1} A)).
SparseMatrix smooth_prolongator(const SparseMatrix& A, const SparseMatrix& P_tent);

enum class AggregationKind { kVmb, kMatching };
enum class CoarseSolverKind { kPcg, kDirect };

std::string to_string(AggregationKind kind);

struct AmgOptions {
  AggregationKind aggregation = AggregationKind::kVmb;
  bool smoothed = true;
  double theta = 0.08;
  int max_aggregate = 8;
  int coarse_stop = 200;
  int max_levels = 25;
  CoarseSolverKind coarse_solver = CoarseSolverKind::kPcg;
  /// Coarsest-level PCG: block-Jacobi with ILU(0) blocks.
  int coarse_blocks = 1;
  double coarse_tol = 1e-4;
  int coarse_maxit = 30;
};

/// Smoothed-aggregation hierarchy applied as one symmetric V-cycle with one
/// backward Gauss-Seidel pre-smoothing and one forward Gauss-Seidel
/// post-smoothing sweep per level.
class AmgHierarchy {
 public:
  AmgHierarchy(const SparseMatrix& A, const AmgOptions& options = {});

  Vector apply(const Vector& r) const;

  /// Replaces the finest matrix (same pattern required) and rebuilds only its
  /// smoother; transfer operators and coarse matrices are kept.
  void update_smoothers(const SparseMatrix& A_new);

  int levels() const { return static_cast<int>(matrices_.size()); }
  const SparseMatrix& matrix(int level) const { return matrices_[level]; }
  const SparseMatrix& prolongator(int level) const { return prolongators_[level]; }
  std::vector<Eigen::Index> level_sizes() const;
  /// Sum of nonzeros over all levels divided by the finest nonzeros.
  double operator_complexity() const;
  const std::vector<std::string>& warnings() const { return warnings_; }
  const AmgOptions& options() const { return options_; }

  /// Coarsest-level solve in isolation.
  Vector coarse_solve(const Vector& r) const;

 private:
  Vector cycle(int level, const Vector& r) const;
  void build_coarse_solver();

  AmgOptions options_;
  std::vector<SparseMatrix> matrices_;
  std::vector<SparseMatrix> prolongators_;
  std::vector<SparseMatrix> restrictions_;
  std::vector<std::string> warnings_;
  std::shared_ptr<AdditiveSchwarz> coarse_prec_;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> coarse_lu_;
};

/// Gauss-Seidel sweeps on A x = b, updating x in place.
void gauss_seidel_forward(const SparseMatrix& A, const Vector& b, Vector& x);
void gauss_seidel_backward(const SparseMatrix& A, const Vector& b, Vector& x);

}  // namespace richards
