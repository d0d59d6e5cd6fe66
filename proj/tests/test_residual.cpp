#include <random>
#include <set>

#include "doctest.h"
#include "richards/residual.hpp"
#include "support.hpp"

using namespace richards;

namespace {

const VanGenuchtenParams kVg = testing::column_params();

// Long-double composite Simpson rule, used as the integral-mean oracle.
long double simpson_mean(double lo, double hi, int panels = 20000) {
  const long double h = (static_cast<long double>(hi) - lo) / panels;
  long double sum = 0;
  for (int i = 0; i <= panels; ++i) {
    const long double x = lo + i * h;
    const long double w = (i == 0 || i == panels) ? 1 : (i % 2 ? 4 : 2);
    sum += w * conductivity(x, kVg);
  }
  return sum * h / 3 / (static_cast<long double>(hi) - lo);
}

}  // namespace

TEST_CASE("all averages agree on equal arguments") {
  for (AverageKind kind : {AverageKind::kArithmetic, AverageKind::kGeometric,
                           AverageKind::kUpstream, AverageKind::kIntegral}) {
    CHECK(interface_k(-30.0, -30.0, kind, kVg) ==
          doctest::Approx(conductivity(-30.0, kVg)).epsilon(1e-15));
  }
}

TEST_CASE("upstream tie takes the upper node") {
  CHECK(average_conductivity(-5.0, -5.0, 1.0, 2.0, AverageKind::kUpstream, kVg) == 2.0);
  CHECK(average_conductivity(-5.0, -4.0, 1.0, 2.0, AverageKind::kUpstream, kVg) == 2.0);
  CHECK(average_conductivity(-4.0, -5.0, 1.0, 2.0, AverageKind::kUpstream, kVg) == 1.0);
}

TEST_CASE("geometric and arithmetic means") {
  CHECK(average_conductivity(-1.0, -2.0, 4.0, 9.0, AverageKind::kGeometric, kVg) == 6.0);
  CHECK(average_conductivity(-1.0, -2.0, 4.0, 9.0, AverageKind::kArithmetic, kVg) == 6.5);
}

TEST_CASE("integral mean matches arithmetic for nearly equal heads") {
  const double p = -25.0;
  const double a = interface_k(p, p + 1e-8, AverageKind::kArithmetic, kVg);
  const double b = interface_k(p, p + 1e-8, AverageKind::kIntegral, kVg);
  CHECK(std::abs(a - b) <= 1e-10 * kVg.k_s);
}

TEST_CASE("integral mean matches a Simpson oracle") {
  for (auto [lo, hi] : {std::pair{-61.5, -20.7}, std::pair{-100.0, -1.0},
                        std::pair{-3.0, 2.0}}) {
    const double got = interface_k(lo, hi, AverageKind::kIntegral, kVg);
    const double rev = interface_k(hi, lo, AverageKind::kIntegral, kVg);
    const long double want = simpson_mean(lo, hi);
    CHECK(std::abs(got - static_cast<double>(want)) <= 1e-11 * kVg.k_s);
    CHECK(std::abs(rev - got) <= 1e-14 * kVg.k_s);
  }
}

TEST_CASE("constant states are fixed points for every average") {
  const auto line = ProblemGrid::line(30, 40.0, 1, 0.1);
  BoundarySpec bc;
  bc.h_r = -42.0;
  const Field p = Field::Constant(line.size(), -42.0);
  const auto box = ProblemGrid::box({6, 5, 7}, {1, 1, 1}, 1, 0.1);
  const Field q = Field::Constant(box.size(), -42.0);
  for (AverageKind kind : {AverageKind::kArithmetic, AverageKind::kGeometric,
                           AverageKind::kUpstream, AverageKind::kIntegral}) {
    CHECK(residual_1d(p, p, line, bc, kVg, kind).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(residual_3d(q, q, box, bc, kVg, kind).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("first column step is nonzero only next to the top boundary") {
  const auto line = ProblemGrid::line(50, 40.0, 1, 0.1);
  const BoundarySpec bc = testing::column_boundary();
  const Field p0 = initial_field(line, bc);
  const Field phi = residual_1d(p0, p0, line, bc, kVg, AverageKind::kArithmetic);
  for (Eigen::Index i = 0; i + 1 < phi.size(); ++i) CHECK(phi[i] == 0.0);
  CHECK(phi[phi.size() - 1] != 0.0);
}

TEST_CASE("perturbation changes only the stencil neighbourhood") {
  std::mt19937_64 rng(3);
  const auto box = ProblemGrid::box({6, 6, 6}, {1, 1, 1}, 1, 0.1);
  BoundarySpec bc;
  bc.kind = BoundaryKind::kTopPatch;
  const Field p = testing::uniform_field(box.size(), -100, -1, rng);
  const Field p_old = testing::uniform_field(box.size(), -100, -1, rng);
  const Field base = residual_3d(p, p_old, box, bc, kVg, AverageKind::kUpstream);
  const Eigen::Index m = box.linear_index(2, 3, 2);
  Field q = p;
  q[m] += 0.5;
  const Field moved = residual_3d(q, p_old, box, bc, kVg, AverageKind::kUpstream);
  std::set<Eigen::Index> allowed = {m};
  const auto n = box.node_of(m);
  for (int axis = 0; axis < 3; ++axis)
    for (int d : {-1, 1}) {
      auto c = n;
      c[axis] += d;
      if (c[axis] >= 1 && c[axis] <= box.interior()[axis])
        allowed.insert(box.linear_index(c[0], c[1], c[2]));
    }
  for (Eigen::Index i = 0; i < base.size(); ++i)
    if (!allowed.count(i)) CHECK(moved[i] == base[i]);
  CHECK(allowed.size() == 7);
}

TEST_CASE("constant conductivity reduces to the 7-point Laplacian") {
  VanGenuchtenParams vg = kVg;
  vg.a = 1e300;  // K == k_s to machine precision
  std::mt19937_64 rng(11);
  const auto box = ProblemGrid::box({6, 7, 8}, {1, 2, 3}, 1, 0.5);
  BoundarySpec bc;
  bc.kind = BoundaryKind::kTopPatch;
  const Field p = testing::uniform_field(box.size(), -100, -1, rng);
  const Field p_old = testing::uniform_field(box.size(), -100, -1, rng);
  const Field phi = residual_3d(p, p_old, box, bc, vg, AverageKind::kArithmetic);

  const Eigen::VectorXd frame = boundary_frame(box, bc);
  const auto& N = box.nodes();
  auto at = [&](int i, int j, int k) {
    const bool inner = i > 0 && j > 0 && k > 0 && i < N[0] - 1 &&
                       j < N[1] - 1 && k < N[2] - 1;
    return inner ? p[box.linear_index(i, j, k)] : frame[(k * N[1] + j) * N[0] + i];
  };
  double worst = 0;
  for (Eigen::Index m = 0; m < box.size(); ++m) {
    const auto [i, j, k] = box.node_of(m);
    const double c = at(i, j, k);
    const double lap =
        (at(i + 1, j, k) - 2 * c + at(i - 1, j, k)) / (box.hx() * box.hx()) +
        (at(i, j + 1, k) - 2 * c + at(i, j - 1, k)) / (box.hy() * box.hy()) +
        (at(i, j, k + 1) - 2 * c + at(i, j, k - 1)) / (box.hz() * box.hz());
    const double want =
        (saturation(c, vg) - saturation(p_old[m], vg)) / box.dt() - vg.k_s * lap;
    worst = std::max(worst, std::abs(phi[m] - want) / (1 + std::abs(want)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("upstream picks the branch given by the head difference") {
  const auto line = ProblemGrid::line(12, 40.0, 1, 0.1);
  BoundarySpec bc;
  bc.kind = BoundaryKind::kTopDirichlet;
  bc.h_r = -5.0;    // bottom
  bc.h_top = -80.0; // top: head decreases upward
  Field p(line.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = -10.0 - 6.0 * i;
  const Field p_old = Field::Constant(p.size(), -50.0);
  const Field phi = residual_1d(p, p_old, line, bc, kVg, AverageKind::kUpstream);

  Eigen::VectorXd full(line.nodes()[2]);
  full << -5.0, p, -80.0;
  const double h = line.hz();
  for (Eigen::Index m = 0; m < p.size(); ++m) {
    const Eigen::Index g = m + 1;
    // Every p_U - p_L < 0, so each face takes the lower-index node.
    const double k_plus = conductivity(full[g], kVg);
    const double k_minus = conductivity(full[g - 1], kVg);
    const double want = (saturation(full[g], kVg) - saturation(-50.0, kVg)) / line.dt() -
                        k_plus * (full[g + 1] - full[g]) / (h * h) +
                        k_minus * (full[g] - full[g - 1]) / (h * h) +
                        (conductivity(full[g - 1], kVg) - conductivity(full[g + 1], kVg)) /
                            (2 * h);
    CHECK(phi[m] == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("column residual equals the box residual with matching side walls") {
  std::mt19937_64 rng(5);
  const int nz = 15;
  const auto line = ProblemGrid::line(nz, 40.0, 1, 0.1);
  const auto box = ProblemGrid::box({3, 3, nz}, {2, 2, 40.0}, 1, 0.1);
  const BoundarySpec bc = testing::column_boundary();
  const Field p = testing::uniform_field(line.size(), -100, -1, rng);
  const Field p_old = testing::uniform_field(line.size(), -100, -1, rng);

  Eigen::VectorXd column(nz);
  column << bc.h_r, p, bc.h_top;
  Eigen::VectorXd frame(9 * nz);
  for (int k = 0; k < nz; ++k) frame.segment(9 * k, 9).setConstant(column[k]);

  Discretization::Options opt;
  opt.include_rho_phi = true;
  const Discretization disc3(box, frame, kVg, AverageKind::kArithmetic, opt);
  for (AverageKind kind : {AverageKind::kArithmetic, AverageKind::kUpstream,
                           AverageKind::kGeometric, AverageKind::kIntegral}) {
    const Discretization d3(box, frame, kVg, kind, opt);
    const Field a = residual_1d(p, p_old, line, bc, kVg, kind, true);
    const Field b = d3.residual<double>(p, p_old);
    CHECK((a - b).lpNorm<Eigen::Infinity>() <= 1e-12 * a.lpNorm<Eigen::Infinity>());
  }
}

TEST_CASE("rho phi scales only the time term") {
  VanGenuchtenParams vg = kVg;
  vg.rho = 2.0;
  vg.phi = 0.5;
  vg.validate();
  std::mt19937_64 rng(9);
  const auto line = ProblemGrid::line(20, 40.0, 1, 0.1);
  const BoundarySpec bc = testing::column_boundary();
  const Field p = testing::uniform_field(line.size(), -100, -1, rng);
  const Field p_old = testing::uniform_field(line.size(), -100, -1, rng);
  vg.rho = 3.0;
  const Field with = residual_1d(p, p_old, line, bc, vg, AverageKind::kArithmetic, true);
  const Field without = residual_1d(p, p_old, line, bc, vg, AverageKind::kArithmetic, false);
  const Field time = (saturation(p, vg) - saturation(p_old, vg)).matrix() / line.dt();
  CHECK((with - without - 0.5 * time).norm() <= 1e-12 * time.norm());
}

TEST_CASE("residual rejects mismatched sizes and grid kinds") {
  const auto line = ProblemGrid::line(20, 40.0, 1, 0.1);
  const auto box = ProblemGrid::box({5, 5, 5}, {1, 1, 1}, 1, 0.1);
  const BoundarySpec bc;
  const Field p = Field::Constant(line.size(), -10.0);
  CHECK_THROWS_AS(residual_1d(p, Field::Constant(3, -1.0), line, bc, kVg,
                              AverageKind::kArithmetic),
                  std::invalid_argument);
  CHECK_THROWS_AS(residual_3d(p, p, line, bc, kVg, AverageKind::kArithmetic),
                  std::invalid_argument);
  CHECK_THROWS_AS(residual_1d(Field::Constant(27, -1.0), Field::Constant(27, -1.0),
                              box, bc, kVg, AverageKind::kArithmetic),
                  std::invalid_argument);
  CHECK(average_kind_from_string("upstream") == AverageKind::kUpstream);
  CHECK_THROWS_AS(average_kind_from_string("harmonic"), std::invalid_argument);
}
