#pragma once

#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "richards/constitutive.hpp"
#include "richards/grid.hpp"

namespace richards::testing {

/// 50-digit binary float used by the extended-precision oracles.
using Wide = boost::multiprecision::cpp_bin_float_50;

/// Infiltration column data set (cm, s).
inline VanGenuchtenParams column_params() { return VanGenuchtenParams{}; }

/// Relative difference with an absolute floor.
inline double rel_err(double got, double want, double floor = 0.0) {
  const double scale = std::max(std::abs(want), floor);
  return scale == 0.0 ? std::abs(got) : std::abs(got - want) / scale;
}

/// Central difference of f at p in extended precision.
template <typename F>
double wide_derivative(F&& f, double p, double rel_step = 1e-8) {
  const Wide x(p);
  const Wide h = Wide(std::abs(p)) * Wide(rel_step);
  return static_cast<double>((f(x + h) - f(x - h)) / (2 * h));
}

}  // namespace richards::testing

namespace richards::testing {

/// Infiltration column: 40 cm, bottom and initial head -61.5, top -20.7.
inline BoundarySpec column_boundary() {
  BoundarySpec bc;
  bc.kind = BoundaryKind::kTopDirichlet;
  bc.h_r = -61.5;
  bc.h_top = -20.7;
  return bc;
}

inline Eigen::VectorXd uniform_field(Eigen::Index n, double lo, double hi,
                                     std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace richards::testing

#include "richards/jacobian.hpp"

namespace richards::testing {

/// Largest entrywise relative difference over the union of both patterns.
/// Entries with |want| below `floor` are compared absolutely against it.
inline double max_rel_entry_err(const SparseMatrix& got, const SparseMatrix& want,
                                double floor = 0.0) {
  const Eigen::MatrixXd a = Eigen::MatrixXd(got);
  const Eigen::MatrixXd b = Eigen::MatrixXd(want);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) == 0.0 && b(i, j) == 0.0) continue;
      worst = std::max(worst, rel_err(a(i, j), b(i, j), floor));
    }
  return worst;
}

/// Central-difference Jacobian of disc.residual evaluated in 50 digits.
inline SparseMatrix wide_fd_jacobian(const Discretization& disc, const Field& p,
                                     const Field& p_old) {
  auto phi = [&](const VectorX<Wide>& x) { return disc.residual<Wide>(x, p_old); };
  return fd_jacobian<Wide>(p, phi, stencil_pattern(disc));
}

}  // namespace richards::testing

namespace richards::testing {

inline SparseMatrix laplacian_1d(int n, double diag = 2.0) {
  std::vector<Eigen::Triplet<double, int>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, diag);
    if (i > 0) t.emplace_back(i, i - 1, -1.0);
    if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

inline SparseMatrix laplacian_3d(int m) {
  std::vector<Eigen::Triplet<double, int>> t;
  auto id = [m](int i, int j, int k) { return (k * m + j) * m + i; };
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const int r = id(i, j, k);
        t.emplace_back(r, r, 6.0);
        if (i > 0) t.emplace_back(r, id(i - 1, j, k), -1.0);
        if (i + 1 < m) t.emplace_back(r, id(i + 1, j, k), -1.0);
        if (j > 0) t.emplace_back(r, id(i, j - 1, k), -1.0);
        if (j + 1 < m) t.emplace_back(r, id(i, j + 1, k), -1.0);
        if (k > 0) t.emplace_back(r, id(i, j, k - 1), -1.0);
        if (k + 1 < m) t.emplace_back(r, id(i, j, k + 1), -1.0);
      }
  SparseMatrix A(m * m * m, m * m * m);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

/// Random strictly diagonally dominant sparse-ish matrix.
inline SparseMatrix random_dominant(int n, std::mt19937_64& rng, double fill = 0.3) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(fill);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double off = 0;
    for (int j = 0; j < n; ++j)
      if (i != j && keep(rng)) {
        D(i, j) = u(rng);
        off += std::abs(D(i, j));
      }
    D(i, i) = off + 1.0 + std::abs(u(rng));
  }
  SparseMatrix A = D.sparseView();
  A.makeCompressed();
  return A;
}

inline SparseMatrix random_spd(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = u(rng);
  Eigen::MatrixXd S = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  SparseMatrix A = S.sparseView();
  A.makeCompressed();
  return A;
}

}  // namespace richards::testing
