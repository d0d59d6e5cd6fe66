#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "richards/jacobian.hpp"
#include "richards/krylov.hpp"
#include "richards/precond/preconditioner.hpp"

namespace richards {

struct NewtonConfig {
  /// GMRES forcing term: ||J d + Phi|| <= eta ||Phi||.
  double eta = 1e-7;
  int max_iterations = 40;
  int reuse_period = 10;
  double step_growth = 1.5;
  double tiny_step = std::pow(std::numeric_limits<double>::epsilon(), 2.0 / 3.0);
  /// Stop when ||D_F Phi||_inf <= ftol.
  double ftol = std::cbrt(std::numeric_limits<double>::epsilon());
  /// Diagonal scalings; empty vectors mean u_scale * I and f_scale * I.
  double u_scale = 1.0;
  double f_scale = 1.0;
  Vector d_u;
  Vector d_f;
  // Line search.
  double c1 = 1e-4;
  double goldstein = 0.9;
  double backtrack = 0.5;
  double min_step = 1e-12;
  int gmres_restart = 10;
  int gmres_maxit = 200;
  /// Rebuild the Jacobian at every iterate (no reuse).
  bool full_newton = false;

  void validate() const;
};

enum RebuildReason : unsigned {
  kNoRebuild = 0,
  kPeriodic = 1u << 0,        // r = 0 (mod reuse_period), incl. the first build
  kLargeStep = 1u << 1,       // ||lambda d_{r-1}|| > step_growth
  kTinyStep = 1u << 2,        // ||lambda d_r|| < tiny_step
  kLinearFailure = 1u << 3,   // GMRES failed with a stale Jacobian
  kLineSearchFailure = 1u << 4,
  kForced = 1u << 5,          // full Newton
};

std::string describe(unsigned reasons);

/// Pure reuse policy. `prev_step` and `curr_step` are ||lambda d||_{D_u,inf};
/// pass NaN when a value is not available yet.
unsigned rebuild_reasons(long r, double prev_step, double curr_step, bool linear_failed,
                         bool linesearch_failed, const NewtonConfig& cfg);
bool should_rebuild_jacobian(long r, double prev_step, double curr_step,
                             bool linear_failed, bool linesearch_failed,
                             const NewtonConfig& cfg);

struct LineSearchResult {
  double lambda = 0.0;
  bool accepted = false;
  int backtracks = 0;
  double f_new = 0.0;
};

/// Backtracking Armijo search with a Goldstein lower bound on
/// f(x) = 0.5 ||D_F F(x)||^2. `slope` is grad f . d; an ascent direction is
/// rejected immediately.
LineSearchResult armijo_goldstein(const std::function<Vector(const Vector&)>& F,
                                  const Vector& x, const Vector& d, double f0,
                                  double slope, const Vector& d_f,
                                  const NewtonConfig& cfg);

/// One Newton iteration, as emitted to the per-iteration CSV.
struct NewtonRecord {
  int step = 0;       // time step (1-based)
  long r = 0;         // global nonlinear iteration index
  int local = 0;      // iteration within the time step
  bool rebuilt = false;
  unsigned reasons = 0;
  int linear_iterations = 0;
  bool linear_converged = false;
  double linear_contract = 0.0;  // ||J d + Phi|| / ||Phi|| recomputed
  double lambda = 0.0;
  int backtracks = 0;
  double phi_norm = 0.0;         // ||D_F Phi||_inf before the update
};

struct NewtonStats {
  int nonlinear_iterations = 0;
  int jacobians = 0;
  int linear_iterations = 0;
  int backtracks = 0;
  int time_steps = 0;
  double worst_linear_contract = 0.0;
  bool all_linear_converged = true;
  std::vector<NewtonRecord> records;

  void merge(const NewtonStats& other);
  double linear_per_newton() const;
  /// Mean over time steps of (linear iterations / Newton iterations).
  double average_linear_per_step() const;
};

class NewtonFailure : public std::runtime_error {
 public:
  NewtonFailure(const std::string& what, NewtonStats stats)
      : std::runtime_error(what), stats(std::move(stats)) {}
  NewtonStats stats;
};

/// The nonlinear map of one time step and its linearizations.
struct StepProblem {
  std::function<Vector(const Vector&)> residual;
  std::function<SparseMatrix(const Vector&)> jacobian;
  /// Matrix handed to the preconditioner; defaults to the Jacobian.
  std::function<SparseMatrix(const Vector&)> preconditioner_matrix;
};

/// Observer called at every Newton iterate p_r (r local, before the
/// convergence test) of every time step.
using IterateObserver = std::function<void(int step, int local, const Vector& p)>;

/// Modified inexact Newton with Jacobian reuse that persists across time
/// steps: the global iteration counter and the last Jacobian carry over.
class NewtonSolver {
 public:
  NewtonSolver(NewtonConfig cfg, PrecondConfig precond, ProblemGrid grid);

  /// Solves Phi(p) = 0 starting from p0. Throws NewtonFailure on
  /// non-convergence.
  Vector solve(const StepProblem& problem, const Vector& p0, int step,
               NewtonStats& stats, const IterateObserver& observer = {});

  long global_iterations() const { return r_; }
  const NewtonConfig& config() const { return cfg_; }
  const Preconditioner* preconditioner() const { return prec_.get(); }

 private:
  void rebuild(const StepProblem& problem, const Vector& p, NewtonStats& stats);

  NewtonConfig cfg_;
  PrecondConfig precond_cfg_;
  ProblemGrid grid_;
  std::unique_ptr<Preconditioner> prec_;
  SparseMatrix J_;
  bool have_jacobian_ = false;
  long r_ = 0;
  double prev_step_ = std::numeric_limits<double>::quiet_NaN();
  bool pending_tiny_ = false;
};

/// Richards time step p_old -> p as a StepProblem.
StepProblem richards_step(const Discretization& disc, const Field& p_old,
                          bool precondition_full_jacobian);

/// One backward Euler step.
Field solve_timestep(const Field& p_old, const Discretization& disc, NewtonSolver& solver,
                     int step, NewtonStats& stats, bool precondition_full_jacobian = false,
                     const IterateObserver& observer = {});

struct SimulationResult {
  std::vector<Field> trajectory;  // p after each time step
  NewtonStats stats;
};

/// grid.steps() backward Euler steps from initial_field.
SimulationResult run_simulation(const Discretization& disc, const NewtonConfig& cfg,
                                const PrecondConfig& precond,
                                const IterateObserver& observer = {});

}  // namespace richards
