#pragma once

#include <functional>
#include <vector>

#include "richards/sparse.hpp"

namespace richards {

/// y = op(x) for a linear operator given only by its action.
using LinearOperator = std::function<Vector(const Vector&)>;

/// Preconditioner action z = M^{-1} r.
using PreconditionerApply = std::function<Vector(const Vector&)>;

inline PreconditionerApply identity_preconditioner() {
  return [](const Vector& r) { return r; };
}

struct SolveReport {
  int iterations = 0;
  /// True relative residual ||b - A x|| / ||b|| of the returned x.
  double relative_residual = 0.0;
  bool converged = false;
  bool breakdown = false;
  /// Arnoldi (or CG) residual estimate after each iteration, relative to ||b||.
  std::vector<double> history;
};

struct SolveResult {
  Vector x;
  SolveReport report;
};

struct GmresOptions {
  int restart = 10;
  double tol = 1e-7;
  int maxit = 200;
};

/// Restarted right-preconditioned GMRES(m) from x0 = 0. Convergence is
/// tested on the true residual at each restart boundary.
SolveResult gmres(const LinearOperator& A, const Vector& b,
                  const PreconditionerApply& M, const GmresOptions& opt = {});
SolveResult gmres(const SparseMatrix& A, const Vector& b,
                  const PreconditionerApply& M, const GmresOptions& opt = {});

struct PcgOptions {
  double tol = 1e-4;
  int maxit = 30;
};

/// Preconditioned conjugate gradients from x0 = 0. Throws
/// std::runtime_error when p^T A p <= 0 is met.
SolveResult pcg(const LinearOperator& A, const Vector& b,
                const PreconditionerApply& M, const PcgOptions& opt = {});
SolveResult pcg(const SparseMatrix& A, const Vector& b,
                const PreconditionerApply& M, const PcgOptions& opt = {});

}  // namespace richards
