#include <cmath>
#include <limits>
#include <map>

#include "doctest.h"
#include "richards/newton.hpp"
#include "support.hpp"

using namespace richards;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

Discretization column(int n, AverageKind kind, int steps = 10) {
  Discretization::Options opt;
  opt.include_rho_phi = false;
  return Discretization(ProblemGrid::line(n, 40.0, steps, 0.1), testing::column_boundary(),
                        testing::column_params(), kind, opt);
}

Discretization small_box(int n) {
  BoundarySpec bc;
  bc.kind = BoundaryKind::kTopPatch;
  bc.h_r = -25.0;
  return Discretization(ProblemGrid::box({n, n, 16}, {4.0, 4.0, 1.0}, 3, 0.2), bc,
                        testing::column_params(), AverageKind::kUpstream);
}

NewtonConfig scaled_for(double h_r) {
  NewtonConfig cfg;
  cfg.u_scale = 1.0 / std::abs(h_r);
  return cfg;
}

PrecondConfig precond(PrecondKind kind) {
  PrecondConfig pc;
  pc.kind = kind;
  return pc;
}

}  // namespace

TEST_CASE("reuse policy examples") {
  const NewtonConfig cfg;
  CHECK(should_rebuild_jacobian(0, kNaN, kNaN, false, false, cfg));
  CHECK_FALSE(should_rebuild_jacobian(3, 0.5, 0.1, false, false, cfg));
  CHECK(should_rebuild_jacobian(10, 0.5, 0.1, false, false, cfg));
  CHECK(should_rebuild_jacobian(20, kNaN, kNaN, false, false, cfg));
}

TEST_CASE("each reuse trigger fires on its own") {
  const NewtonConfig cfg;
  CHECK(rebuild_reasons(3, 1.6, 0.1, false, false, cfg) == kLargeStep);
  CHECK(rebuild_reasons(3, 1.5, 0.1, false, false, cfg) == kNoRebuild);
  CHECK(rebuild_reasons(3, 0.5, 1e-12, false, false, cfg) == kTinyStep);
  CHECK(rebuild_reasons(3, 0.5, 0.1, true, false, cfg) == kLinearFailure);
  CHECK(rebuild_reasons(3, 0.5, 0.1, false, true, cfg) == kLineSearchFailure);
  CHECK(rebuild_reasons(10, 2.0, 0.0, true, true, cfg) ==
        (kPeriodic | kLargeStep | kTinyStep | kLinearFailure | kLineSearchFailure));
  CHECK(describe(kPeriodic | kLargeStep) == "periodic+large_step");
}

TEST_CASE("reuse policy is deterministic") {
  const NewtonConfig cfg;
  for (long r = 0; r < 40; ++r)
    for (double s : {kNaN, 0.0, 1e-11, 0.3, 1.5, 1.7})
      CHECK(should_rebuild_jacobian(r, s, s, false, false, cfg) ==
            should_rebuild_jacobian(r, s, s, false, false, cfg));
}

TEST_CASE("newton config validation") {
  NewtonConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.eta = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NewtonConfig{};
  cfg.d_u = Vector::Constant(3, 1.0);
  cfg.d_u[1] = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NewtonConfig{};
  cfg.goldstein = 1e-5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("line search takes the full step on a quadratic") {
  auto F = [](const Vector& x) { return Vector(x); };
  const Vector x = Vector::Constant(1, 3.0);
  const Vector d = -x;
  const Vector one = Vector::Ones(1);
  const double f0 = 0.5 * x.squaredNorm();
  const LineSearchResult ls = armijo_goldstein(F, x, d, f0, x.dot(d), one, NewtonConfig{});
  CHECK(ls.accepted);
  CHECK(ls.lambda == 1.0);
  CHECK(ls.backtracks == 0);
}

TEST_CASE("line search rejects an ascent direction") {
  auto F = [](const Vector& x) { return Vector(x); };
  const Vector x = Vector::Constant(1, 3.0);
  const Vector d = x;
  const LineSearchResult ls = armijo_goldstein(F, x, d, 0.5 * x.squaredNorm(), x.dot(d),
                                               Vector::Ones(1), NewtonConfig{});
  CHECK_FALSE(ls.accepted);
  CHECK(ls.backtracks == 0);
}

TEST_CASE("line search backtracks on an overshooting direction") {
  auto F = [](const Vector& x) { return Vector(x); };
  const Vector x = Vector::Constant(1, 1.0);
  const Vector d = Vector::Constant(1, -4.0);  // lambda = 1 lands at -3
  const LineSearchResult ls = armijo_goldstein(F, x, d, 0.5, x.dot(d), Vector::Ones(1),
                                               NewtonConfig{});
  REQUIRE(ls.accepted);
  CHECK(ls.lambda < 1.0);
  CHECK(ls.f_new <= 0.5 + 1e-4 * ls.lambda * x.dot(d));
  CHECK(ls.f_new >= 0.5 + 0.9 * ls.lambda * x.dot(d));
}

TEST_CASE("linear residual converges in one newton iteration") {
  std::mt19937_64 rng(5);
  const SparseMatrix A = testing::random_dominant(30, rng, 0.2);
  const Vector target = testing::uniform_field(30, -1.0, 1.0, rng);
  StepProblem prob;
  prob.residual = [&](const Vector& p) { return Vector(spmv(A, Vector(p - target))); };
  prob.jacobian = [&](const Vector&) { return A; };
  NewtonStats stats;
  NewtonSolver solver(NewtonConfig{}, precond(PrecondKind::kIlu0),
                      ProblemGrid::line(32, 1.0, 1, 1.0));
  const Vector p = solver.solve(prob, Vector::Zero(30), 1, stats);
  CHECK(stats.nonlinear_iterations == 1);
  CHECK(stats.jacobians == 1);
  CHECK((p - target).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("zero time steps give an empty trajectory") {
  const SimulationResult res =
      run_simulation(column(50, AverageKind::kArithmetic, 0), NewtonConfig{},
                     precond(PrecondKind::kIlu0));
  CHECK(res.trajectory.empty());
  CHECK(res.stats.nonlinear_iterations == 0);
  CHECK(res.stats.jacobians == 0);
}

TEST_CASE("constant data is a fixed point") {
  BoundarySpec bc;
  bc.kind = BoundaryKind::kUniformDirichlet;
  bc.h_r = -30.0;
  const Discretization disc(ProblemGrid::box({6, 6, 6}, {1.0, 1.0, 1.0}, 4, 0.2), bc,
                            testing::column_params(), AverageKind::kArithmetic);
  const SimulationResult res = run_simulation(disc, NewtonConfig{}, precond(PrecondKind::kIlu0));
  REQUIRE(res.trajectory.size() == 4);
  CHECK(res.stats.nonlinear_iterations <= 4);
  for (const Field& p : res.trajectory)
    CHECK((p.array() + 30.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("infiltration column: iteration budget, reuse and wetting front") {
  for (AverageKind kind : {AverageKind::kArithmetic, AverageKind::kUpstream}) {
    CAPTURE(to_string(kind));
    const Discretization disc = column(800, kind);
    const SimulationResult res =
        run_simulation(disc, NewtonConfig{}, precond(PrecondKind::kIlu0));
    const NewtonStats& s = res.stats;
    REQUIRE(res.trajectory.size() == 10);

    // Total iterations over the run, at most 6 per time step.
    CHECK(s.nonlinear_iterations <= 6 * 10);
    CHECK(s.jacobians < s.nonlinear_iterations);
    CHECK(s.jacobians <= s.nonlinear_iterations + 1);
    CHECK(s.all_linear_converged);
    CHECK(s.worst_linear_contract <= 1e-7);

    // First step, first iterate: the full step is accepted.
    REQUIRE(!s.records.empty());
    CHECK(s.records.front().lambda == 1.0);

    // Global counter runs across steps without gaps.
    for (std::size_t i = 0; i < s.records.size(); ++i)
      CHECK(s.records[i].r == static_cast<long>(i));

    // Linear-iteration conservation.
    int total = 0;
    for (const auto& rec : s.records) total += rec.linear_iterations;
    CHECK(total == s.linear_iterations);

    // Heads only rise, and the wet zone near the top grows.
    Field prev = initial_field(disc.grid(), disc.boundary());
    int wet_prev = 0;
    for (const Field& p : res.trajectory) {
      CHECK((p - prev).minCoeff() > -1e-6);
      int wet = 0;
      for (Eigen::Index i = p.size() - 1; i >= 0 && p[i] > -40.0; --i) ++wet;
      CHECK(wet >= wet_prev);
      wet_prev = wet;
      prev = p;
    }
    CHECK(wet_prev > 0);
    const double top = prev[prev.size() - 1];
    CHECK(top > -25.0);
    CHECK(top <= -20.7 + 1e-9);
  }
}

TEST_CASE("full newton builds a jacobian at every iterate") {
  NewtonConfig cfg;
  cfg.full_newton = true;
  const SimulationResult res =
      run_simulation(column(200, AverageKind::kArithmetic, 3), cfg, precond(PrecondKind::kIlu0));
  CHECK(res.stats.jacobians == res.stats.nonlinear_iterations);
}

TEST_CASE("converged fields do not depend on the preconditioner") {
  const Discretization disc = small_box(12);
  const NewtonConfig cfg = scaled_for(disc.boundary().h_r);
  std::map<std::string, Field> finals;
  for (PrecondKind kind : {PrecondKind::kIlu0, PrecondKind::kAdditiveSchwarz,
                           PrecondKind::kAmgVmb, PrecondKind::kAmgMatching}) {
    const SimulationResult res = run_simulation(disc, cfg, precond(kind));
    CHECK(res.stats.worst_linear_contract <= 1e-7);
    finals[to_string(kind)] = res.trajectory.back();
  }
  const Field& ref = finals.at("ilu0");
  for (const auto& [name, p] : finals) {
    CAPTURE(name);
    CHECK((p - ref).lpNorm<Eigen::Infinity>() <= 1e-5 * ref.lpNorm<Eigen::Infinity>());
  }
}

TEST_CASE("newton failure carries the statistics") {
  NewtonConfig cfg;
  cfg.max_iterations = 1;
  cfg.ftol = 1e-300;
  try {
    run_simulation(column(100, AverageKind::kArithmetic, 2), cfg, precond(PrecondKind::kIlu0));
    FAIL("expected NewtonFailure");
  } catch (const NewtonFailure& e) {
    CHECK(e.stats.nonlinear_iterations == 1);
    CHECK(e.stats.records.size() == 1);
  }
}
