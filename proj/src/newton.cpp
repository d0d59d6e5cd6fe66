#include "richards/newton.hpp"

#include <cmath>
#include <map>

namespace richards {

void NewtonConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("newton: ") + what);
  };
  require(eta > 0.0 && eta < 1.0, "eta must lie in (0,1)");
  require(max_iterations > 0, "max_iterations must be positive");
  require(reuse_period > 0, "reuse_period must be positive");
  require(step_growth > 0.0 && tiny_step > 0.0 && ftol > 0.0, "thresholds must be positive");
  require(u_scale > 0.0 && f_scale > 0.0, "scalings must be positive");
  require(d_u.size() == 0 || d_u.minCoeff() > 0.0, "D_u entries must be positive");
  require(d_f.size() == 0 || d_f.minCoeff() > 0.0, "D_F entries must be positive");
  require(c1 > 0.0 && c1 < goldstein && goldstein < 1.0, "need 0 < c1 < goldstein < 1");
  require(backtrack > 0.0 && backtrack < 1.0, "backtrack must lie in (0,1)");
  require(min_step > 0.0, "min_step must be positive");
  require(gmres_restart > 0 && gmres_maxit > 0, "gmres limits must be positive");
}

std::string describe(unsigned reasons) {
  if (reasons == kNoRebuild) return "";
  static const std::pair<unsigned, const char*> names[] = {
      {kPeriodic, "periodic"},          {kLargeStep, "large_step"},
      {kTinyStep, "tiny_step"},         {kLinearFailure, "linear_failure"},
      {kLineSearchFailure, "linesearch_failure"}, {kForced, "full_newton"}};
  std::string out;
  for (const auto& [bit, name] : names)
    if (reasons & bit) out += (out.empty() ? "" : "+") + std::string(name);
  return out;
}

unsigned rebuild_reasons(long r, double prev_step, double curr_step, bool linear_failed,
                         bool linesearch_failed, const NewtonConfig& cfg) {
  unsigned reasons = kNoRebuild;
  if (r % cfg.reuse_period == 0) reasons |= kPeriodic;
  if (prev_step > cfg.step_growth) reasons |= kLargeStep;   // false for NaN
  if (curr_step < cfg.tiny_step) reasons |= kTinyStep;      // false for NaN
  if (linear_failed) reasons |= kLinearFailure;
  if (linesearch_failed) reasons |= kLineSearchFailure;
  return reasons;
}

bool should_rebuild_jacobian(long r, double prev_step, double curr_step,
                             bool linear_failed, bool linesearch_failed,
                             const NewtonConfig& cfg) {
  return rebuild_reasons(r, prev_step, curr_step, linear_failed, linesearch_failed, cfg) !=
         kNoRebuild;
}

namespace {

double merit(const Vector& F, const Vector& d_f) {
  return 0.5 * d_f.cwiseProduct(F).squaredNorm();
}

Vector scaling(const Vector& explicit_diag, double scalar, Eigen::Index n) {
  if (explicit_diag.size() == 0) return Vector::Constant(n, scalar);
  if (explicit_diag.size() != n) throw std::invalid_argument("newton: scaling size mismatch");
  return explicit_diag;
}

}  // namespace

LineSearchResult armijo_goldstein(const std::function<Vector(const Vector&)>& F,
                                  const Vector& x, const Vector& d, double f0,
                                  double slope, const Vector& d_f,
                                  const NewtonConfig& cfg) {
  LineSearchResult out;
  if (!d.allFinite() || !(slope < 0.0)) return out;
  double lambda = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
  while (lambda >= cfg.min_step) {
    const double f = merit(F(x + lambda * d), d_f);
    if (!std::isfinite(f) || f > f0 + cfg.c1 * lambda * slope) {
      hi = lambda;
      lambda = lo > 0.0 ? 0.5 * (lo + hi) : cfg.backtrack * lambda;
      ++out.backtracks;
    } else if (lambda < 1.0 && f < f0 + cfg.goldstein * lambda * slope &&
               hi - lo > cfg.min_step) {
      lo = lambda;  // decrease too large for so short a step
      lambda = 0.5 * (lo + hi);
    } else {
      out.lambda = lambda;
      out.accepted = true;
      out.f_new = f;
      return out;
    }
  }
  return out;
}

void NewtonStats::merge(const NewtonStats& other) {
  nonlinear_iterations += other.nonlinear_iterations;
  jacobians += other.jacobians;
  linear_iterations += other.linear_iterations;
  backtracks += other.backtracks;
  time_steps += other.time_steps;
  worst_linear_contract = std::max(worst_linear_contract, other.worst_linear_contract);
  all_linear_converged = all_linear_converged && other.all_linear_converged;
  records.insert(records.end(), other.records.begin(), other.records.end());
}

double NewtonStats::linear_per_newton() const {
  return nonlinear_iterations == 0
             ? 0.0
             : static_cast<double>(linear_iterations) / nonlinear_iterations;
}

double NewtonStats::average_linear_per_step() const {
  std::map<int, std::pair<int, int>> per_step;  // step -> (linear, newton)
  for (const auto& rec : records) {
    per_step[rec.step].first += rec.linear_iterations;
    per_step[rec.step].second += 1;
  }
  if (per_step.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [step, counts] : per_step)
    sum += static_cast<double>(counts.first) / counts.second;
  return sum / static_cast<double>(per_step.size());
}

NewtonSolver::NewtonSolver(NewtonConfig cfg, PrecondConfig precond, ProblemGrid grid)
    : cfg_(std::move(cfg)), precond_cfg_(std::move(precond)), grid_(std::move(grid)) {
  cfg_.validate();
}

void NewtonSolver::rebuild(const StepProblem& problem, const Vector& p, NewtonStats& stats) {
  J_ = problem.jacobian(p);
  const SparseMatrix M =
      problem.preconditioner_matrix ? problem.preconditioner_matrix(p) : J_;
  if (!prec_)
    prec_ = make_preconditioner(precond_cfg_, M, grid_);
  else
    prec_->refresh(M);
  have_jacobian_ = true;
  ++stats.jacobians;
}

Vector NewtonSolver::solve(const StepProblem& problem, const Vector& p0, int step,
                           NewtonStats& stats, const IterateObserver& observer) {
  const Eigen::Index n = p0.size();
  const Vector d_u = scaling(cfg_.d_u, cfg_.u_scale, n);
  const Vector d_f = scaling(cfg_.d_f, cfg_.f_scale, n);
  GmresOptions gopt;
  gopt.restart = cfg_.gmres_restart;
  gopt.tol = cfg_.eta;
  gopt.maxit = cfg_.gmres_maxit;

  ++stats.time_steps;
  Vector p = p0;
  for (int local = 0;; ++local) {
    const Vector phi = problem.residual(p);
    const double fnorm = d_f.cwiseProduct(phi).lpNorm<Eigen::Infinity>();
    if (observer) observer(step, local, p);
    if (fnorm <= cfg_.ftol) return p;
    if (local >= cfg_.max_iterations)
      throw NewtonFailure("newton: no convergence in step " + std::to_string(step) +
                              " after " + std::to_string(local) + " iterations",
                          stats);

    NewtonRecord rec;
    rec.step = step;
    rec.r = r_;
    rec.local = local;
    rec.phi_norm = fnorm;
    rec.reasons = cfg_.full_newton ? unsigned(kForced)
                                   : rebuild_reasons(r_, prev_step_,
                                                     std::numeric_limits<double>::quiet_NaN(),
                                                     false, false, cfg_);
    if (pending_tiny_) rec.reasons |= kTinyStep;
    bool fresh = false;
    if (rec.reasons != kNoRebuild || !have_jacobian_) {
      rebuild(problem, p, stats);
      fresh = true;
    }

    auto linear_solve = [&]() {
      SolveResult res = gmres(J_, Vector(-phi), prec_->action(), gopt);
      rec.linear_iterations += res.report.iterations;
      stats.linear_iterations += res.report.iterations;
      return res;
    };
    SolveResult lin = linear_solve();
    if (!lin.report.converged && !fresh) {
      rec.reasons |= kLinearFailure;
      rebuild(problem, p, stats);
      fresh = true;
      lin = linear_solve();
    }

    const double f0 = 0.5 * d_f.cwiseProduct(phi).squaredNorm();
    auto search = [&]() {
      const Vector Jd = spmv(J_, lin.x);
      const double slope = d_f.cwiseProduct(phi).dot(d_f.cwiseProduct(Jd));
      return armijo_goldstein(problem.residual, p, lin.x, f0, slope, d_f, cfg_);
    };
    LineSearchResult ls = search();
    rec.backtracks += ls.backtracks;
    if (!ls.accepted && !fresh) {
      rec.reasons |= kLineSearchFailure;
      rebuild(problem, p, stats);
      fresh = true;
      lin = linear_solve();
      ls = search();
      rec.backtracks += ls.backtracks;
    }
    stats.backtracks += rec.backtracks;

    const double phi2 = phi.norm();
    rec.linear_converged = lin.report.converged;
    rec.linear_contract = phi2 > 0.0 ? (spmv(J_, lin.x) + phi).norm() / phi2 : 0.0;
    stats.worst_linear_contract = std::max(stats.worst_linear_contract, rec.linear_contract);
    stats.all_linear_converged = stats.all_linear_converged && lin.report.converged;
    rec.rebuilt = fresh;

    if (!ls.accepted) {
      stats.records.push_back(rec);
      throw NewtonFailure("newton: line search failed in step " + std::to_string(step), stats);
    }
    const Vector delta = ls.lambda * lin.x;
    p += delta;
    rec.lambda = ls.lambda;
    const double step_norm = d_u.cwiseProduct(delta).lpNorm<Eigen::Infinity>();
    pending_tiny_ = (rebuild_reasons(r_, std::numeric_limits<double>::quiet_NaN(), step_norm,
                                     false, false, cfg_) &
                     kTinyStep) != 0;
    prev_step_ = step_norm;
    stats.records.push_back(rec);
    ++stats.nonlinear_iterations;
    ++r_;
  }
}

StepProblem richards_step(const Discretization& disc, const Field& p_old,
                          bool precondition_full_jacobian) {
  StepProblem prob;
  prob.residual = [&disc, p_old](const Vector& p) { return disc.residual<double>(p, p_old); };
  prob.jacobian = [&disc](const Vector& p) { return jacobian(disc, p); };
  if (!precondition_full_jacobian) {
    prob.preconditioner_matrix = [&disc](const Vector& p) -> SparseMatrix {
      if (disc.average() == AverageKind::kArithmetic ||
          disc.average() == AverageKind::kUpstream)
        return diffusion_preconditioner_matrix(disc, p);
      SparseMatrix D = jacobian(disc, p) - gravity_matrix(disc, p);
      D.makeCompressed();
      return D;
    };
  }
  return prob;
}

Field solve_timestep(const Field& p_old, const Discretization& disc, NewtonSolver& solver,
                     int step, NewtonStats& stats, bool precondition_full_jacobian,
                     const IterateObserver& observer) {
  const StepProblem prob = richards_step(disc, p_old, precondition_full_jacobian);
  return solver.solve(prob, p_old, step, stats, observer);
}

SimulationResult run_simulation(const Discretization& disc, const NewtonConfig& cfg,
                                const PrecondConfig& precond,
                                const IterateObserver& observer) {
  SimulationResult out;
  NewtonSolver solver(cfg, precond, disc.grid());
  Field p = initial_field(disc.grid(), disc.boundary());
  for (int step = 1; step <= disc.grid().steps(); ++step) {
    p = solve_timestep(p, disc, solver, step, out.stats, precond.on_full_jacobian, observer);
    out.trajectory.push_back(p);
  }
  return out;
}

}  // namespace richards
