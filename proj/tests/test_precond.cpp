#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "richards/jacobian.hpp"
#include "richards/precond/preconditioner.hpp"
#include "support.hpp"

using namespace richards;

namespace {

int gmres_its(const SparseMatrix& A, const Vector& b, const PreconditionerApply& M) {
  GmresOptions opt;
  opt.maxit = 2000;
  const SolveResult r = gmres(A, b, M, opt);
  REQUIRE(r.report.converged);
  return r.report.iterations;
}

}  // namespace

TEST_CASE("ilu0 is exact on diagonal and tridiagonal matrices") {
  std::mt19937_64 rng(30);
  SparseMatrix D = identity_matrix(9) * 3.0;
  const Vector r = testing::uniform_field(9, -1, 1, rng);
  CHECK((Ilu0(D).solve(r) - r / 3.0).norm() <= 1e-15);

  const SparseMatrix T = testing::laplacian_1d(40, 2.3);
  const Vector b = testing::uniform_field(40, -1, 1, rng);
  const Vector want = Eigen::MatrixXd(T).partialPivLu().solve(b);
  CHECK((Ilu0(T).solve(b) - want).norm() <= 1e-12 * want.norm());
}

TEST_CASE("ilu0 on the 7-point Laplacian drops fill but helps GMRES") {
  std::mt19937_64 rng(31);
  const SparseMatrix A = testing::laplacian_3d(6);
  const Ilu0 ilu(A);
  const Eigen::MatrixXd LU = Eigen::MatrixXd(ilu.lower()) * Eigen::MatrixXd(ilu.upper());
  const double rel = (Eigen::MatrixXd(A) - LU).norm() / Eigen::MatrixXd(A).norm();
  CHECK(rel > 0.0);
  CHECK(rel <= 0.5);
  const Vector b = testing::uniform_field(A.rows(), -1, 1, rng);
  CHECK(gmres_its(A, b, [&](const Vector& v) { return ilu.solve(v); }) <
        gmres_its(A, b, identity_preconditioner()));
}

TEST_CASE("ilu0 names the row of a zero pivot") {
  Eigen::MatrixXd M(3, 3);
  M << 1, 1, 0, 1, 1, 1, 0, 1, 2;
  CHECK_THROWS_WITH_AS(Ilu0(SparseMatrix(M.sparseView())), doctest::Contains("row 1"),
                       std::runtime_error);
}

TEST_CASE("schwarz reduces to ilu0 and block-Jacobi") {
  std::mt19937_64 rng(32);
  const SparseMatrix A = testing::random_dominant(60, rng, 0.1);
  const Ilu0 ilu(A);
  const AdditiveSchwarz one(A, contiguous_partition(60, 1));
  const auto part = contiguous_partition(60, 4);
  const AdditiveSchwarz bj(A, part);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector r = testing::uniform_field(60, -1, 1, rng);
    CHECK((one.apply(r) - ilu.solve(r)).norm() <= 1e-14 * r.norm());
    Vector want = Vector::Zero(60);
    for (const auto& core : part.cores) {
      const Ilu0 block(principal_submatrix(A, core));
      Vector local(static_cast<Eigen::Index>(core.size()));
      for (std::size_t i = 0; i < core.size(); ++i) local[i] = r[core[i]];
      local = block.solve(local);
      for (std::size_t i = 0; i < core.size(); ++i) want[core[i]] = local[i];
    }
    CHECK((bj.apply(r) - want).norm() <= 1e-14 * want.norm());
  }
}

TEST_CASE("overlap dilates cores by stencil layers") {
  const SparseMatrix A = testing::laplacian_1d(32);
  const auto part = with_overlap(contiguous_partition(32, 2), A, 1);
  CHECK(part.overlapped[0].back() == 16);
  CHECK(part.overlapped[1].front() == 15);
  CHECK(part.cores[0].size() == 16);

  const auto g = ProblemGrid::box({8, 8, 5}, {1, 1, 1}, 1, 0.1);
  const auto gp = grid_partition(g, 2, 3);
  CHECK(gp.blocks() == 6);
  std::size_t covered = 0;
  for (const auto& c : gp.cores) covered += c.size();
  CHECK(covered == static_cast<std::size_t>(g.size()));
}

TEST_CASE("schwarz with overlap on a 1D Laplacian") {
  std::mt19937_64 rng(33);
  const SparseMatrix A = testing::laplacian_1d(32);
  const Vector b = testing::uniform_field(32, -1, 1, rng);
  const AdditiveSchwarz bj(A, contiguous_partition(32, 2));
  const AdditiveSchwarz as(A, with_overlap(contiguous_partition(32, 2), A, 1));
  const int its_bj = gmres_its(A, b, [&](const Vector& v) { return bj.apply(v); });
  const int its_as = gmres_its(A, b, [&](const Vector& v) { return as.apply(v); });
  MESSAGE("block-Jacobi " << its_bj << " iterations, overlap 1 " << its_as);
  CHECK(its_as < its_bj);
}

TEST_CASE("vmb aggregation of a 1D Laplacian") {
  const AggregationMap agg = vmb_aggregate(testing::laplacian_1d(9), 0.08);
  CHECK(agg.count == 3);
  CHECK(agg.sizes() == std::vector<int>{3, 3, 3});
  CHECK(agg.aggregate == std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2});

  const AggregationMap diag = vmb_aggregate(identity_matrix(5), 0.08);
  CHECK(diag.count == 5);
}

TEST_CASE("aggregations are partitions and coarsen connected stencils") {
  std::mt19937_64 rng(34);
  std::uniform_int_distribution<int> dim(3, 9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = ProblemGrid::box({dim(rng), dim(rng), dim(rng)}, {1, 2, 1}, 1, 0.1);
    BoundarySpec bc;
    const Discretization disc(g, bc, VanGenuchtenParams{}, AverageKind::kArithmetic);
    const Field p = testing::uniform_field(g.size(), -100, -1, rng);
    const SparseMatrix A = diffusion_preconditioner_matrix(disc, p);
    for (const AggregationMap& agg : {vmb_aggregate(A), matching_aggregate(A)}) {
      std::vector<int> sizes = agg.sizes();
      int total = 0;
      for (int s : sizes) {
        CHECK(s >= 1);
        total += s;
      }
      CHECK(total == g.size());
      if (g.size() >= 3) CHECK(agg.count < g.size());
    }
  }
}

TEST_CASE("matching aggregation") {
  const AggregationMap path = matching_aggregate(testing::laplacian_1d(8), 8);
  CHECK(path.count == 1);
  CHECK(matching_aggregate(identity_matrix(6)).count == 6);

  std::mt19937_64 rng(35);
  int largest = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const SparseMatrix A = testing::random_dominant(40, rng, 0.2);
    const SparseMatrix S = SparseMatrix(A + SparseMatrix(A.transpose()));
    for (int s : matching_aggregate(S).sizes()) largest = std::max(largest, s);
  }
  CHECK(largest <= 8);
  CHECK(largest >= 2);
}

TEST_CASE("amg hierarchy on a 1D Laplacian") {
  AmgOptions opt;
  opt.smoothed = false;
  opt.coarse_stop = 3;
  const AmgHierarchy h(testing::laplacian_1d(27), opt);
  CHECK(h.level_sizes() == std::vector<Eigen::Index>{27, 9, 3});
  for (int l = 0; l + 1 < h.levels(); ++l) {
    const SparseMatrix again = triple_product(h.prolongator(l), h.matrix(l));
    CHECK(same_pattern(again, h.matrix(l + 1)));
    CHECK((Eigen::MatrixXd(again) - Eigen::MatrixXd(h.matrix(l + 1))).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(h.operator_complexity() > 1.0);
}

TEST_CASE("smoothed prolongator acts on constants as the damped Jacobi step") {
  const SparseMatrix A = testing::laplacian_1d(27);
  const AggregationMap agg = vmb_aggregate(A);
  const SparseMatrix T = tentative_prolongator(agg);
  const SparseMatrix P = smooth_prolongator(A, T);
  const double omega = 4.0 / (3.0 * jacobi_spectral_radius(A));
  const Vector ones_fine = Vector::Ones(27);
  const Vector want = ones_fine - omega * (A * ones_fine).cwiseQuotient(Vector::Constant(27, 2.0));
  CHECK((P * Vector::Ones(agg.count) - want).norm() <= 1e-14);
  CHECK(jacobi_spectral_radius(A) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("one-level hierarchy is the coarse solve") {
  std::mt19937_64 rng(36);
  const SparseMatrix A = testing::laplacian_1d(50);
  AmgOptions opt;
  opt.coarse_stop = 100;
  const AmgHierarchy h(A, opt);
  CHECK(h.levels() == 1);
  const Vector r = testing::uniform_field(50, -1, 1, rng);
  const AdditiveSchwarz M(A, contiguous_partition(50, 1));
  PcgOptions popt;
  const Vector want = pcg(A, r, [&](const Vector& v) { return M.apply(v); }, popt).x;
  CHECK((h.apply(r) - want).norm() == 0.0);
}

TEST_CASE("v-cycle with a direct coarse solve is a symmetric operator") {
  std::mt19937_64 rng(37);
  const SparseMatrix A = testing::laplacian_3d(10);
  for (AggregationKind kind : {AggregationKind::kVmb, AggregationKind::kMatching}) {
    AmgOptions opt;
    opt.aggregation = kind;
    opt.coarse_stop = 20;
    opt.coarse_solver = CoarseSolverKind::kDirect;
    const AmgHierarchy h(A, opt);
    CHECK(h.levels() >= 3);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector x = testing::uniform_field(A.rows(), -1, 1, rng);
      const Vector y = testing::uniform_field(A.rows(), -1, 1, rng);
      const double a = h.apply(x).dot(y), b = x.dot(h.apply(y));
      CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1.0));
    }
  }
}

TEST_CASE("v-cycle error propagation contracts on the 1D model problem") {
  std::mt19937_64 rng(38);
  const SparseMatrix A = testing::laplacian_1d(243);
  AmgOptions opt;
  opt.coarse_stop = 10;
  opt.coarse_solver = CoarseSolverKind::kDirect;
  const AmgHierarchy h(A, opt);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector e = testing::uniform_field(243, -1, 1, rng);
    const Vector next = e - h.apply(A * e);
    CHECK(next.norm() < e.norm());
  }
}

TEST_CASE("smoother update keeps the coarse levels") {
  std::mt19937_64 rng(39);
  const SparseMatrix A = testing::laplacian_3d(8);
  AmgOptions opt;
  opt.coarse_stop = 30;
  AmgHierarchy h(A, opt);
  const Vector r = testing::uniform_field(A.rows(), -1, 1, rng);
  const Vector before = h.apply(r);
  h.update_smoothers(A);
  CHECK((h.apply(r) - before).norm() == 0.0);

  const SparseMatrix A2 = 2.0 * A;
  const SparseMatrix coarse = h.matrix(1);
  h.update_smoothers(A2);
  CHECK((Eigen::MatrixXd(h.matrix(1)) - Eigen::MatrixXd(coarse)).norm() == 0.0);
  const AmgHierarchy fresh(A2, opt);
  CHECK((h.apply(r) - fresh.apply(r)).norm() > 0.0);
  GmresOptions gopt;
  gopt.maxit = 500;
  CHECK(gmres(A2, r, [&](const Vector& v) { return h.apply(v); }, gopt).report.converged);

  CHECK_THROWS_AS(h.update_smoothers(testing::laplacian_3d(7)), std::invalid_argument);
  CHECK_THROWS_AS(h.update_smoothers(SparseMatrix(testing::laplacian_1d(512))),
                  std::invalid_argument);
}

TEST_CASE("factory builds every kind") {
  std::mt19937_64 rng(40);
  const auto g = ProblemGrid::box({12, 12, 10}, {4, 4, 1}, 1, 0.2);
  BoundarySpec bc;
  bc.kind = BoundaryKind::kTopPatch;
  const Discretization disc(g, bc, VanGenuchtenParams{}, AverageKind::kArithmetic);
  const Field p = testing::uniform_field(g.size(), -70, -20, rng);
  const SparseMatrix J = assemble(disc, p);
  const SparseMatrix M = diffusion_preconditioner_matrix(disc, p);
  const Vector b = testing::uniform_field(g.size(), -1, 1, rng);
  const int none = gmres_its(J, b, identity_preconditioner());
  for (PrecondKind kind : {PrecondKind::kIlu0, PrecondKind::kBlockJacobi,
                           PrecondKind::kAdditiveSchwarz, PrecondKind::kAmgVmb,
                           PrecondKind::kAmgMatching}) {
    PrecondConfig cfg;
    cfg.kind = kind;
    cfg.amg.coarse_stop = 50;
    auto prec = make_preconditioner(cfg, M, g);
    CHECK(prec->name().size() > 0);
    CHECK(gmres_its(J, b, prec->action()) < none);
    prec->refresh(M);
  }
  CHECK(precond_kind_from_string("amg_match") == PrecondKind::kAmgMatching);
  CHECK_THROWS_AS(precond_kind_from_string("ilut"), std::invalid_argument);
}
