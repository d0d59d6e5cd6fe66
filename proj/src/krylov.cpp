#include "richards/krylov.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace richards {

namespace {

LinearOperator as_operator(const SparseMatrix& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("krylov: matrix is not square");
  return [&A](const Vector& x) { return spmv(A, x); };
}

// Givens rotation zeroing b in (a, b).
void givens(double a, double b, double& c, double& s) {
  if (b == 0.0) {
    c = 1.0;
    s = 0.0;
  } else {
    const double r = std::hypot(a, b);
    c = a / r;
    s = b / r;
  }
}

}  // namespace

SolveResult gmres(const LinearOperator& A, const Vector& b,
                  const PreconditionerApply& M, const GmresOptions& opt) {
  if (opt.restart < 1 || opt.maxit < 0 || !(opt.tol > 0.0))
    throw std::invalid_argument("gmres: invalid options");
  const Eigen::Index n = b.size();
  SolveResult out{Vector::Zero(n), {}};
  SolveReport& rep = out.report;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    return out;
  }

  const int m = opt.restart;
  Eigen::MatrixXd V(n, m + 1), Z(n, m);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);

  while (true) {
    const Vector r = b - A(out.x);
    if (r.size() != n) throw std::invalid_argument("gmres: dimension mismatch");
    const double beta = r.norm();
    rep.relative_residual = beta / bnorm;
    if (rep.relative_residual <= opt.tol) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= opt.maxit || rep.breakdown) break;

    V.col(0) = r / beta;
    g.setZero();
    g[0] = beta;
    H.setZero();
    int k = 0;
    for (int j = 0; j < m && rep.iterations < opt.maxit; ++j) {
      Z.col(j) = M(V.col(j));
      Vector w = A(Z.col(j));
      ++rep.iterations;
      const double wnorm0 = w.norm();
      for (int i = 0; i <= j; ++i) {
        H(i, j) = w.dot(V.col(i));
        w -= H(i, j) * V.col(i);
      }
      double wnorm = w.norm();
      // Second pass if the first left a visible component along the basis.
      if (wnorm > 0.0) {
        const double loss = (V.leftCols(j + 1).transpose() * w).cwiseAbs().maxCoeff() / wnorm;
        if (loss > 1e-8) {
          for (int i = 0; i <= j; ++i) {
            const double c = w.dot(V.col(i));
            H(i, j) += c;
            w -= c * V.col(i);
          }
          wnorm = w.norm();
        }
      }
      H(j + 1, j) = wnorm;
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      givens(H(j, j), H(j + 1, j), cs[j], sn[j]);
      H(j, j) = cs[j] * H(j, j) + sn[j] * H(j + 1, j);
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      k = j + 1;
      rep.history.push_back(std::abs(g[j + 1]) / bnorm);

      if (wnorm <= 1e-14 * wnorm0) {
        rep.breakdown = true;  // invariant subspace found
        break;
      }
      V.col(j + 1) = w / wnorm;
      if (std::abs(g[j + 1]) / bnorm <= opt.tol) break;
    }
    if (k == 0) break;
    const Eigen::VectorXd y =
        H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    out.x += Z.leftCols(k) * y;
  }
  if (rep.breakdown && rep.converged) rep.breakdown = false;
  return out;
}

SolveResult gmres(const SparseMatrix& A, const Vector& b,
                  const PreconditionerApply& M, const GmresOptions& opt) {
  if (A.rows() != b.size()) throw std::invalid_argument("gmres: dimension mismatch");
  return gmres(as_operator(A), b, M, opt);
}

SolveResult pcg(const LinearOperator& A, const Vector& b,
                const PreconditionerApply& M, const PcgOptions& opt) {
  const Eigen::Index n = b.size();
  SolveResult out{Vector::Zero(n), {}};
  SolveReport& rep = out.report;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    return out;
  }
  Vector r = b;
  Vector z = M(r);
  Vector p = z;
  double rz = r.dot(z);
  while (rep.iterations < opt.maxit) {
    const Vector Ap = A(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0))
      throw std::runtime_error("pcg: operator is not positive definite (p^T A p = " +
                               std::to_string(pAp) + ")");
    const double alpha = rz / pAp;
    out.x += alpha * p;
    r -= alpha * Ap;
    ++rep.iterations;
    rep.history.push_back(r.norm() / bnorm);
    if (rep.history.back() <= opt.tol) break;
    z = M(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  rep.relative_residual = (b - A(out.x)).norm() / bnorm;
  rep.converged = rep.relative_residual <= opt.tol;
  return out;
}

SolveResult pcg(const SparseMatrix& A, const Vector& b,
                const PreconditionerApply& M, const PcgOptions& opt) {
  if (A.rows() != b.size()) throw std::invalid_argument("pcg: dimension mismatch");
  return pcg(as_operator(A), b, M, opt);
}

}  // namespace richards
