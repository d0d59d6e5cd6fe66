#include "richards/precond/amg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace richards {

namespace {

Vector diagonal_of(const SparseMatrix& A) {
  Vector d = Vector::Zero(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) d[i] = A.coeff(i, i);
  return d;
}

// Composition: fine -> mid (first) then mid -> coarse (second).
AggregationMap compose(const AggregationMap& first, const AggregationMap& second) {
  AggregationMap out;
  out.count = second.count;
  out.aggregate.resize(first.aggregate.size());
  for (std::size_t i = 0; i < first.aggregate.size(); ++i)
    out.aggregate[i] = second.aggregate[first.aggregate[i]];
  return out;
}

AggregationMap pairwise_matching(const SparseMatrix& B) {
  const int n = static_cast<int>(B.rows());
  const Vector d = diagonal_of(B);
  struct Edge {
    double w;
    int i, j;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (SparseMatrix::InnerIterator it(B, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (j <= i || it.value() == 0.0) continue;
      edges.push_back({1.0 - 2.0 * it.value() / (d[i] + d[j]), i, j});
    }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& a, const Edge& b) { return a.w > b.w; });
  std::vector<int> mate(n, -1);
  for (const Edge& e : edges)
    if (e.w > 0.0 && mate[e.i] < 0 && mate[e.j] < 0) {
      mate[e.i] = e.j;
      mate[e.j] = e.i;
    }
  AggregationMap agg;
  agg.aggregate.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (agg.aggregate[i] >= 0) continue;
    agg.aggregate[i] = agg.count;
    if (mate[i] >= 0) agg.aggregate[mate[i]] = agg.count;
    ++agg.count;
  }
  return agg;
}

}  // namespace

std::vector<int> AggregationMap::sizes() const {
  std::vector<int> s(count, 0);
  for (int a : aggregate) ++s[a];
  return s;
}

bool strongly_coupled(double aij, double aii, double ajj, double theta) {
  return std::abs(aij) > theta * std::sqrt(std::abs(aii * ajj));
}

AggregationMap vmb_aggregate(const SparseMatrix& A, double theta) {
  const int n = static_cast<int>(A.rows());
  const Vector d = diagonal_of(A);
  std::vector<std::vector<int>> strong(n);
  for (int i = 0; i < n; ++i)
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (j != i && strongly_coupled(it.value(), d[i], d[j], theta))
        strong[i].push_back(j);
    }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return strong[a].size() > strong[b].size();
  });

  AggregationMap agg;
  agg.aggregate.assign(n, -1);
  for (int i : order) {
    if (agg.aggregate[i] >= 0 || strong[i].empty()) continue;
    const bool free = std::all_of(strong[i].begin(), strong[i].end(),
                                  [&](int j) { return agg.aggregate[j] < 0; });
    if (!free) continue;
    agg.aggregate[i] = agg.count;
    for (int j : strong[i]) agg.aggregate[j] = agg.count;
    ++agg.count;
  }

  const std::vector<int> seeded = agg.aggregate;
  for (int i = 0; i < n; ++i) {
    if (seeded[i] >= 0) continue;
    double best = -1.0;
    for (int j : strong[i]) {
      if (seeded[j] < 0) continue;
      const double s = std::abs(A.coeff(i, j)) / std::sqrt(std::abs(d[i] * d[j]));
      if (s > best) {
        best = s;
        agg.aggregate[i] = seeded[j];
      }
    }
  }

  for (int i = 0; i < n; ++i)
    if (agg.aggregate[i] < 0) agg.aggregate[i] = agg.count++;
  return agg;
}

AggregationMap matching_aggregate(const SparseMatrix& A, int max_size) {
  if (max_size < 1) throw std::invalid_argument("matching: max_size must be >= 1");
  AggregationMap agg;
  agg.count = static_cast<int>(A.rows());
  agg.aggregate.resize(A.rows());
  std::iota(agg.aggregate.begin(), agg.aggregate.end(), 0);
  SparseMatrix B = A;
  for (int reach = 2; reach <= max_size; reach *= 2) {
    const AggregationMap round = pairwise_matching(B);
    agg = compose(agg, round);
    if (reach * 2 <= max_size) B = triple_product(tentative_prolongator(round), B);
  }
  return agg;
}

SparseMatrix tentative_prolongator(const AggregationMap& agg) {
  const int n = static_cast<int>(agg.aggregate.size());
  SparseMatrix P(n, agg.count);
  P.reserve(Eigen::VectorXi::Constant(n, 1));
  for (int i = 0; i < n; ++i) P.insert(i, agg.aggregate[i]) = 1.0;
  P.makeCompressed();
  return P;
}

double jacobi_spectral_radius(const SparseMatrix& A, int iterations) {
  const Vector dinv = diagonal_of(A).cwiseInverse();
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Vector x(A.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = u(rng);
  x.normalize();
  double rho = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Vector y = dinv.cwiseProduct(A * x);
    rho = y.norm();
    if (rho == 0.0) break;
    x = y / rho;
  }
  return rho;
}

SparseMatrix smooth_prolongator(const SparseMatrix& A, const SparseMatrix& P_tent) {
  const double rho = jacobi_spectral_radius(A);
  const double omega = rho > 0.0 ? 4.0 / (3.0 * rho) : 0.0;
  const Vector dinv = diagonal_of(A).cwiseInverse();
  SparseMatrix DA = dinv.asDiagonal() * A;
  SparseMatrix P = P_tent - omega * SparseMatrix(DA * P_tent);
  P.prune(0.0);
  P.makeCompressed();
  return P;
}

std::string to_string(AggregationKind kind) {
  return kind == AggregationKind::kVmb ? "vmb" : "matching (approx.)";
}

void gauss_seidel_forward(const SparseMatrix& A, const Vector& b, Vector& x) {
  const int n = static_cast<int>(A.rows());
  const int* ptr = A.outerIndexPtr();
  const int* col = A.innerIndexPtr();
  const double* val = A.valuePtr();
  for (int i = 0; i < n; ++i) {
    double s = b[i], diag = 0.0;
    for (int q = ptr[i]; q < ptr[i + 1]; ++q) {
      if (col[q] == i)
        diag = val[q];
      else
        s -= val[q] * x[col[q]];
    }
    x[i] = s / diag;
  }
}

void gauss_seidel_backward(const SparseMatrix& A, const Vector& b, Vector& x) {
  const int n = static_cast<int>(A.rows());
  const int* ptr = A.outerIndexPtr();
  const int* col = A.innerIndexPtr();
  const double* val = A.valuePtr();
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i], diag = 0.0;
    for (int q = ptr[i]; q < ptr[i + 1]; ++q) {
      if (col[q] == i)
        diag = val[q];
      else
        s -= val[q] * x[col[q]];
    }
    x[i] = s / diag;
  }
}

AmgHierarchy::AmgHierarchy(const SparseMatrix& A, const AmgOptions& options)
    : options_(options) {
  if (A.rows() != A.cols()) throw std::invalid_argument("amg: matrix is not square");
  if (!A.isCompressed()) throw std::invalid_argument("amg: matrix must be compressed");
  matrices_.push_back(A);
  while (matrices_.back().rows() > options_.coarse_stop &&
         levels() < options_.max_levels) {
    const SparseMatrix& Al = matrices_.back();
    const AggregationMap agg = options_.aggregation == AggregationKind::kVmb
                                   ? vmb_aggregate(Al, options_.theta)
                                   : matching_aggregate(Al, options_.max_aggregate);
    if (agg.count >= Al.rows()) {
      warnings_.push_back("amg: coarsening stagnated at level " +
                          std::to_string(levels() - 1) + " with " +
                          std::to_string(Al.rows()) + " dofs");
      break;
    }
    SparseMatrix P = tentative_prolongator(agg);
    if (options_.smoothed) P = smooth_prolongator(Al, P);
    SparseMatrix Ac = triple_product(P, Al);
    restrictions_.push_back(P.transpose());
    prolongators_.push_back(std::move(P));
    matrices_.push_back(std::move(Ac));
  }
  build_coarse_solver();
}

void AmgHierarchy::build_coarse_solver() {
  const SparseMatrix& Ac = matrices_.back();
  if (options_.coarse_solver == CoarseSolverKind::kDirect) {
    coarse_prec_.reset();
    coarse_lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    coarse_lu_->compute(Eigen::SparseMatrix<double>(Ac));
    if (coarse_lu_->info() != Eigen::Success)
      throw std::runtime_error("amg: coarse factorization failed");
  } else {
    coarse_lu_.reset();
    const int blocks = std::clamp<int>(options_.coarse_blocks, 1, static_cast<int>(Ac.rows()));
    coarse_prec_ = std::make_shared<AdditiveSchwarz>(
        Ac, contiguous_partition(Ac.rows(), blocks));
  }
}

Vector AmgHierarchy::coarse_solve(const Vector& r) const {
  if (coarse_lu_) return coarse_lu_->solve(r);
  const AdditiveSchwarz& M = *coarse_prec_;
  PcgOptions opt;
  opt.tol = options_.coarse_tol;
  opt.maxit = options_.coarse_maxit;
  return pcg(matrices_.back(), r, [&M](const Vector& v) { return M.apply(v); }, opt).x;
}

Vector AmgHierarchy::cycle(int level, const Vector& r) const {
  if (level == levels() - 1) return coarse_solve(r);
  const SparseMatrix& A = matrices_[level];
  Vector x = Vector::Zero(r.size());
  gauss_seidel_backward(A, r, x);
  const Vector rc = restrictions_[level] * (r - A * x);
  x += prolongators_[level] * cycle(level + 1, rc);
  gauss_seidel_forward(A, r, x);
  return x;
}

Vector AmgHierarchy::apply(const Vector& r) const {
  if (r.size() != matrices_.front().rows())
    throw std::invalid_argument("amg: dimension mismatch");
  return cycle(0, r);
}

void AmgHierarchy::update_smoothers(const SparseMatrix& A_new) {
  if (A_new.rows() != matrices_.front().rows() || !same_pattern(A_new, matrices_.front()))
    throw std::invalid_argument("amg: replacement matrix has a different pattern");
  matrices_.front() = A_new;
  if (levels() == 1) build_coarse_solver();
}

std::vector<Eigen::Index> AmgHierarchy::level_sizes() const {
  std::vector<Eigen::Index> s;
  for (const auto& M : matrices_) s.push_back(M.rows());
  return s;
}

double AmgHierarchy::operator_complexity() const {
  double total = 0.0;
  for (const auto& M : matrices_) total += static_cast<double>(M.nonZeros());
  return total / static_cast<double>(matrices_.front().nonZeros());
}

}  // namespace richards
