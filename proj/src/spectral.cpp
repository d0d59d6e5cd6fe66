#include "richards/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace richards {

Eigen::VectorXd SymbolGrid::sorted_values() const {
  Eigen::VectorXd v = values.reshaped();
  std::sort(v.begin(), v.end());
  return v;
}

Eigen::VectorXd theta_samples(int n_theta) {
  if (n_theta < 1) throw std::invalid_argument("symbol: n_theta must be positive");
  Eigen::VectorXd theta(n_theta);
  for (int j = 0; j < n_theta; ++j) theta[j] = std::numbers::pi * (j + 0.5) / n_theta;
  return theta;
}

SymbolGrid sample_symbol_1d(const Field& p, const ProblemGrid& grid,
                            const VanGenuchtenParams& params, int n_theta) {
  return sample_symbol_1d(p, grid, params, theta_samples(n_theta));
}

SymbolGrid sample_symbol_1d(const Field& p, const ProblemGrid& grid,
                            const VanGenuchtenParams& params,
                            const Eigen::VectorXd& theta) {
  if (!grid.is_line()) throw std::invalid_argument("sample_symbol_1d: grid is not a line");
  if (p.size() != grid.size()) throw std::invalid_argument("sample_symbol_1d: field size mismatch");
  const auto n_theta = theta.size();
  SymbolGrid sym;
  sym.theta = theta;
  const double c = grid.hz() * grid.hz() / grid.dt();
  const int nz = grid.nodes()[2];
  sym.x.resize(p.size());
  sym.values.resize(p.size(), n_theta);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    sym.x[i] = static_cast<double>(i + 1) / (nz - 1);
    const double time = c * d_saturation(p[i], params);
    const double k = conductivity(p[i], params);
    for (Eigen::Index j = 0; j < n_theta; ++j)
      sym.values(i, j) = time + k * (2.0 - 2.0 * std::cos(sym.theta[j]));
  }
  return sym;
}

SymbolGrid sample_symbol_3d(const Field& p, const ProblemGrid& grid,
                            const VanGenuchtenParams& params, int n_theta) {
  return sample_symbol_3d(p, grid, params, theta_samples(n_theta));
}

SymbolGrid sample_symbol_3d(const Field& p, const ProblemGrid& grid,
                            const VanGenuchtenParams& params,
                            const Eigen::VectorXd& theta) {
  if (grid.is_line()) throw std::invalid_argument("sample_symbol_3d: grid is a line");
  if (p.size() != grid.size()) throw std::invalid_argument("sample_symbol_3d: field size mismatch");
  const auto n_theta = theta.size();
  SymbolGrid sym;
  sym.theta_axes = 3;
  sym.theta = theta;
  const double c = grid.hz() * grid.hz() / grid.dt() * params.rho_phi();
  Eigen::VectorXd stencil(n_theta * n_theta * n_theta);
  Eigen::Index col = 0;
  for (Eigen::Index c3 = 0; c3 < n_theta; ++c3)
    for (Eigen::Index c2 = 0; c2 < n_theta; ++c2)
      for (Eigen::Index c1 = 0; c1 < n_theta; ++c1, ++col)
        stencil[col] = 6.0 - 2.0 * (std::cos(sym.theta[c1]) + std::cos(sym.theta[c2]) +
                                    std::cos(sym.theta[c3]));
  sym.x.resize(p.size());
  sym.values.resize(p.size(), stencil.size());
  for (Eigen::Index m = 0; m < p.size(); ++m) {
    sym.x[m] = static_cast<double>(m + 1) / static_cast<double>(p.size() + 1);
    sym.values.row(m) = (c * d_saturation(p[m], params) +
                         conductivity(p[m], params) * stencil.array()).transpose();
  }
  return sym;
}

SymbolGrid sample_symbol(const Discretization& disc, const Field& p, int n_theta) {
  return disc.grid().is_line() ? sample_symbol_1d(p, disc.grid(), disc.params(), n_theta)
                               : sample_symbol_3d(p, disc.grid(), disc.params(), n_theta);
}

EigDistribution eigenvalues_tridiagonal(const SparseMatrix& A) {
  const Eigen::Index n = A.rows();
  if (n != A.cols() || n == 0) throw std::invalid_argument("eigenvalues: matrix must be square");
  if (n > 4000) throw std::invalid_argument("eigenvalues: dimension above 4000");
  for (Eigen::Index i = 0; i < n; ++i)
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
      if (std::abs(it.col() - i) > 1 && it.value() != 0.0)
        throw std::invalid_argument("eigenvalues: matrix is not tridiagonal");

  Eigen::EigenSolver<Eigen::MatrixXd> solver;
  solver.setMaxIterations(30 * n);
  solver.compute(Eigen::MatrixXd(A), false);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigenvalues: QR did not converge");
  const Eigen::VectorXcd lambda = solver.eigenvalues();
  EigDistribution out;
  out.dimension = n;
  out.real = lambda.real();
  out.max_imag = lambda.imag().cwiseAbs().maxCoeff();
  std::sort(out.real.begin(), out.real.end());
  return out;
}

Eigen::VectorXd matched_quantiles(const EigDistribution& eigs, const SymbolGrid& sym) {
  const Eigen::Index n = eigs.real.size();
  if (n == 0 || sym.sample_count() == 0)
    throw std::invalid_argument("distribution_distance: empty input");
  const Eigen::VectorXd s = sym.sorted_values();
  const Eigen::Index m = s.size();
  Eigen::VectorXd q(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto idx = static_cast<Eigen::Index>((k + 0.5) * static_cast<double>(m) / n);
    q[k] = s[std::min(idx, m - 1)];
  }
  return q;
}

double distribution_distance(const EigDistribution& eigs, const SymbolGrid& sym) {
  const Eigen::VectorXd q = matched_quantiles(eigs, sym);
  const Eigen::VectorXd s = sym.sorted_values();
  double range = s[s.size() - 1] - s[0];
  if (!(range > 0.0)) range = std::max(std::abs(s[0]), 1e-300);
  return (eigs.real - q).cwiseAbs().mean() / range;
}

double spectral_norm(const SparseMatrix& A, int max_iterations, double tol) {
  const Eigen::Index n = A.cols();
  if (n == 0) return 0.0;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + i);
  v.normalize();
  const SparseMatrix At = A.transpose();
  double sigma2 = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector w = spmv(At, spmv(A, v));
    const double next = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (std::abs(next - sigma2) <= tol * std::abs(next)) {
      sigma2 = next;
      break;
    }
    sigma2 = next;
  }
  return std::sqrt(std::max(sigma2, 0.0));
}

ZeroDistribution zero_distribution_check(const Discretization& disc, const Field& p) {
  const ProblemGrid& grid = disc.grid();
  if (!grid.is_line()) throw std::invalid_argument("zero_distribution_check: grid is not a line");
  const double hz = grid.hz();
  const SparseMatrix T = gravity_matrix(disc, p);
  double max_dk = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    max_dk = std::max(max_dk, std::abs(d_conductivity(p[i], disc.params())));
  ZeroDistribution out;
  out.bound = hz * max_dk;
  out.norm = spectral_norm(SparseMatrix(hz * hz * T));
  out.pass = out.norm <= out.bound * (1.0 + 1e-12);
  return out;
}

double AsEquivalenceTable::relative_gap() const {
  const double hi = std::max(full, diffusion);
  return hi > 0.0 ? std::abs(full - diffusion) / hi : 0.0;
}

namespace {

std::map<int, double> per_step_average(const NewtonStats& stats) {
  std::map<int, std::pair<int, int>> acc;
  for (const auto& rec : stats.records) {
    acc[rec.step].first += rec.linear_iterations;
    acc[rec.step].second += 1;
  }
  std::map<int, double> out;
  for (const auto& [step, c] : acc) out[step] = static_cast<double>(c.first) / c.second;
  return out;
}

}  // namespace

AsEquivalenceTable as_equivalence_experiment(const Discretization& disc,
                                             const NewtonConfig& cfg,
                                             const PrecondConfig& as_config,
                                             bool with_identity) {
  PrecondConfig full = as_config;
  full.kind = PrecondKind::kAdditiveSchwarz;
  full.on_full_jacobian = true;
  PrecondConfig diffusion = full;
  diffusion.on_full_jacobian = false;
  PrecondConfig none = full;
  none.kind = PrecondKind::kNone;

  AsEquivalenceTable table;
  table.full_stats = run_simulation(disc, cfg, full).stats;
  table.diffusion_stats = run_simulation(disc, cfg, diffusion).stats;
  if (with_identity) table.identity_stats = run_simulation(disc, cfg, none).stats;
  table.full = table.full_stats.average_linear_per_step();
  table.diffusion = table.diffusion_stats.average_linear_per_step();
  table.identity = table.identity_stats.average_linear_per_step();

  const auto f = per_step_average(table.full_stats);
  const auto d = per_step_average(table.diffusion_stats);
  const auto i = per_step_average(table.identity_stats);
  for (int step = 1; step <= disc.grid().steps(); ++step) {
    AsEquivalenceRow row;
    row.step = step;
    if (auto it = f.find(step); it != f.end()) row.full = it->second;
    if (auto it = d.find(step); it != d.end()) row.diffusion = it->second;
    if (auto it = i.find(step); it != i.end()) row.identity = it->second;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace richards
