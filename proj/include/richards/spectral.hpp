#pragma once

#include <vector>

#include <Eigen/Core>

#include "richards/newton.hpp"

namespace richards {

/// Samples of a GLT symbol f(x, theta). Row i holds the interior node x_i,
/// column j one theta sample (a flattened (theta1, theta2, theta3) triple
/// in 3D, theta1 fastest).
struct SymbolGrid {
  Eigen::VectorXd x;      // node positions as fractions of [0,1] (z in 1D)
  Eigen::VectorXd theta;  // samples in [0,pi] along each axis
  Eigen::MatrixXd values;
  int theta_axes = 1;

  Eigen::Index sample_count() const { return values.size(); }
  Eigen::VectorXd sorted_values() const;
};

/// Eigenvalues of one matrix, real parts sorted ascending.
struct EigDistribution {
  Eigen::VectorXd real;
  double max_imag = 0.0;
  Eigen::Index dimension = 0;
};

/// Midpoint samples theta_j = pi (j + 1/2) / n_theta.
Eigen::VectorXd theta_samples(int n_theta);

/// kappa(x, theta) = C s'(p) + K(p) (2 - 2 cos theta), C = h_z^2 / dt.
/// The symbol is the same for the arithmetic and upstream Jacobians.
SymbolGrid sample_symbol_1d(const Field& p, const ProblemGrid& grid,
                            const VanGenuchtenParams& params, int n_theta);
SymbolGrid sample_symbol_1d(const Field& p, const ProblemGrid& grid,
                            const VanGenuchtenParams& params,
                            const Eigen::VectorXd& theta);

/// f(x, theta) = C rho phi s'(p) + K(p) sum_a (2 - 2 cos theta_a),
/// C = h_z^2 / dt. Sample count is n_interior * n_theta^3.
SymbolGrid sample_symbol_3d(const Field& p, const ProblemGrid& grid,
                            const VanGenuchtenParams& params, int n_theta);
SymbolGrid sample_symbol_3d(const Field& p, const ProblemGrid& grid,
                            const VanGenuchtenParams& params,
                            const Eigen::VectorXd& theta);

/// Symbol of the Jacobian of `disc` at p (1D or 3D by grid). The average
/// kind of `disc` does not enter.
SymbolGrid sample_symbol(const Discretization& disc, const Field& p, int n_theta);

/// All eigenvalues of a tridiagonal matrix by Hessenberg QR with double
/// shifts. Throws std::invalid_argument if A is not tridiagonal or larger
/// than 4000, std::runtime_error if QR fails to converge in 30 n sweeps.
EigDistribution eigenvalues_tridiagonal(const SparseMatrix& A);

/// Symbol values resampled onto eigs.dimension points by sorted-quantile
/// matching: the k-th value is the (k + 1/2)/n quantile.
Eigen::VectorXd matched_quantiles(const EigDistribution& eigs, const SymbolGrid& sym);

/// Mean |lambda_k - q_k| over the sorted sequences divided by the range of
/// the symbol. Throws std::invalid_argument on empty inputs.
double distribution_distance(const EigDistribution& eigs, const SymbolGrid& sym);

struct ZeroDistribution {
  double bound = 0.0;  // h_z max |K'(p)|
  double norm = 0.0;   // ||h_z^2 T_N||_2
  bool pass = false;
};

/// 2-norm of the scaled transport term h_z^2 T_N of the 1D Jacobian, with
/// T_N the gravity part, against the bound h_z max_i |K'(p_i)|.
ZeroDistribution zero_distribution_check(const Discretization& disc, const Field& p);

/// Largest singular value by power iteration on A^T A.
double spectral_norm(const SparseMatrix& A, int max_iterations = 2000, double tol = 1e-12);

/// Average linear iterations per Newton step for three preconditioning
/// choices, per time step and overall.
struct AsEquivalenceRow {
  int step = 0;
  double full = 0.0;       // AS built on the full Jacobian
  double diffusion = 0.0;  // AS built on the diffusion-only matrix
  double identity = 0.0;   // no preconditioner
};

struct AsEquivalenceTable {
  std::vector<AsEquivalenceRow> rows;
  double full = 0.0;
  double diffusion = 0.0;
  double identity = 0.0;
  NewtonStats full_stats, diffusion_stats, identity_stats;

  /// |full - diffusion| / max(full, diffusion).
  double relative_gap() const;
};

/// Runs the simulation with AS on the full Jacobian, AS on the
/// diffusion-only matrix, and (if `with_identity`) without preconditioning.
AsEquivalenceTable as_equivalence_experiment(const Discretization& disc,
                                             const NewtonConfig& cfg,
                                             const PrecondConfig& as_config,
                                             bool with_identity = true);

}  // namespace richards
