#include "richards/jacobian.hpp"

#include <stdexcept>

namespace richards {

namespace {

using Triplet = Eigen::Triplet<double, int>;

// Interior-numbering strides (x fastest).
std::array<Eigen::Index, 3> interior_strides(const ProblemGrid& grid) {
  const auto m = grid.interior();
  if (grid.is_line()) return {0, 0, 1};
  return {1, m[0], static_cast<Eigen::Index>(m[0]) * m[1]};
}

struct FaceDerivative {
  double kbar;     // interface conductivity
  double dk_self;  // d kbar / d p_m
  double dk_nb;    // d kbar / d p_n
};

// Interface between the centre node m and neighbour n. `n_is_upper` tells
// whether n is the higher-index node U of the interface.
FaceDerivative face_derivative(AverageKind kind, bool n_is_upper, double pm,
                               double pn, double km, double kn, double dkm,
                               double dkn) {
  if (kind == AverageKind::kArithmetic)
    return {0.5 * (km + kn), 0.5 * dkm, 0.5 * dkn};
  const double p_upper = n_is_upper ? pn : pm;
  const double p_lower = n_is_upper ? pm : pn;
  const bool take_upper = p_upper - p_lower >= 0.0;
  const bool take_neighbour = take_upper == n_is_upper;
  return take_neighbour ? FaceDerivative{kn, 0.0, dkn}
                        : FaceDerivative{km, dkm, 0.0};
}

}  // namespace

SparseMatrix stencil_pattern(const Discretization& disc) {
  const ProblemGrid& grid = disc.grid();
  const auto m = grid.interior();
  const auto istride = interior_strides(grid);
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(disc.size()) * 7);
  for (Eigen::Index row = 0; row < disc.size(); ++row) {
    const auto node = grid.node_of(row);
    entries.emplace_back(row, row, 0.0);
    for (int axis = disc.first_axis(); axis < 3; ++axis) {
      if (node[axis] > 1) entries.emplace_back(row, row - istride[axis], 0.0);
      if (node[axis] < m[axis]) entries.emplace_back(row, row + istride[axis], 0.0);
    }
  }
  SparseMatrix P(disc.size(), disc.size());
  P.setFromTriplets(entries.begin(), entries.end());
  P.makeCompressed();
  return P;
}

SparseMatrix assemble(const Discretization& disc, const Field& p,
                      JacobianTerms terms) {
  const AverageKind kind = disc.average();
  if (terms != JacobianTerms::kGravityOnly && kind != AverageKind::kArithmetic &&
      kind != AverageKind::kUpstream)
    throw std::invalid_argument("assemble: no closed-form Jacobian for the " +
                                to_string(kind) + " average");
  const ProblemGrid& grid = disc.grid();
  const VanGenuchtenParams& vg = disc.params();
  const Eigen::VectorXd full = disc.embed<double>(p);
  Eigen::VectorXd k(full.size()), dk(full.size());
  for (Eigen::Index g = 0; g < full.size(); ++g) {
    k[g] = conductivity(full[g], vg);
    dk[g] = d_conductivity(full[g], vg);
  }

  const bool with_diffusion = terms != JacobianTerms::kGravityOnly;
  const bool with_gravity = terms != JacobianTerms::kDiffusionOnly;
  const auto m_int = grid.interior();
  const auto fstride = disc.strides();
  const auto istride = interior_strides(grid);
  const auto& h = grid.spacing();
  const double time_coef = disc.time_coefficient() / grid.dt();

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(disc.size()) * 7);
  for (Eigen::Index row = 0; row < disc.size(); ++row) {
    const auto node = grid.node_of(row);
    const Eigen::Index g = disc.full_index(row);
    const double pm = full[g];
    double diag = with_diffusion ? time_coef * d_saturation(pm, vg) : 0.0;

    for (int axis = disc.first_axis(); axis < 3; ++axis) {
      const double h2 = h[axis] * h[axis];
      for (int dir : {-1, +1}) {
        const Eigen::Index gn = g + dir * fstride[axis];
        const double pn = full[gn];
        const FaceDerivative face = face_derivative(
            kind, dir > 0, pm, pn, k[g], k[gn], dk[g], dk[gn]);
        const double dp = pn - pm;
        // Face contribution to Phi_m: -kbar (p_n - p_m) / h^2.
        if (with_diffusion) diag += face.kbar / h2 - dp * face.dk_self / h2;
        double off = with_diffusion ? -face.kbar / h2 - dp * face.dk_nb / h2 : 0.0;
        // Gravity: -K(p_{k+1})/(2h_z) + K(p_{k-1})/(2h_z).
        if (axis == 2 && with_gravity) off += -dir * dk[gn] / (2.0 * h[2]);

        const bool interior_nb =
            dir > 0 ? node[axis] < m_int[axis] : node[axis] > 1;
        if (interior_nb)
          entries.emplace_back(row, row + dir * istride[axis], off);
      }
    }
    entries.emplace_back(row, row, diag);
  }
  SparseMatrix J(disc.size(), disc.size());
  J.setFromTriplets(entries.begin(), entries.end());
  J.makeCompressed();
  return J;
}

JacobianMatrix assemble_1d(const Field& p, const ProblemGrid& grid,
                           const BoundarySpec& spec,
                           const VanGenuchtenParams& params, AverageKind kind) {
  if (!grid.is_line())
    throw std::invalid_argument("assemble_1d: grid is not one-dimensional");
  Discretization::Options opt;
  opt.include_rho_phi = false;
  const Discretization disc(grid, spec, params, kind, opt);
  return {assemble(disc, p), kind};
}

JacobianMatrix assemble_3d(const Field& p, const ProblemGrid& grid,
                           const BoundarySpec& spec,
                           const VanGenuchtenParams& params, AverageKind kind) {
  if (grid.is_line())
    throw std::invalid_argument("assemble_3d: grid is one-dimensional");
  const Discretization disc(grid, spec, params, kind);
  return {assemble(disc, p), kind};
}

SparseMatrix diffusion_preconditioner_matrix(const Discretization& disc,
                                             const Field& p) {
  return assemble(disc, p, JacobianTerms::kDiffusionOnly);
}

SparseMatrix diffusion_preconditioner_matrix(const Field& p,
                                             const ProblemGrid& grid,
                                             const BoundarySpec& spec,
                                             const VanGenuchtenParams& params,
                                             AverageKind kind) {
  Discretization::Options opt;
  opt.include_rho_phi = !grid.is_line();
  return diffusion_preconditioner_matrix(
      Discretization(grid, spec, params, kind, opt), p);
}

SparseMatrix gravity_matrix(const Discretization& disc, const Field& p) {
  return assemble(disc, p, JacobianTerms::kGravityOnly);
}

SparseMatrix jacobian(const Discretization& disc, const Field& p) {
  if (disc.average() == AverageKind::kArithmetic ||
      disc.average() == AverageKind::kUpstream)
    return assemble(disc, p);
  auto phi = [&disc, &p](const Eigen::VectorXd& x) {
    return disc.residual<double>(x, p);
  };
  return fd_jacobian<double>(p, phi, stencil_pattern(disc));
}

std::vector<int> column_colouring(const SparseMatrix& pattern,
                                  int* colour_count) {
  const Eigen::Index n = pattern.cols();
  std::vector<int> colour(static_cast<std::size_t>(n), -1);
  int used = 0;
  // Columns sharing a row with j are the distance-2 neighbours of j in the
  // (symmetric) adjacency graph.
  std::vector<Eigen::Index> forbidden_at(static_cast<std::size_t>(n) + 64, -1);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (SparseMatrix::InnerIterator r(pattern, j); r; ++r) {
      const Eigen::Index row = r.col();
      for (SparseMatrix::InnerIterator c(pattern, row); c; ++c) {
        const int cc = colour[static_cast<std::size_t>(c.col())];
        if (cc >= 0) forbidden_at[static_cast<std::size_t>(cc)] = j;
      }
    }
    int chosen = 0;
    while (forbidden_at[static_cast<std::size_t>(chosen)] == j) ++chosen;
    colour[static_cast<std::size_t>(j)] = chosen;
    used = std::max(used, chosen + 1);
  }
  if (colour_count) *colour_count = used;
  return colour;
}

}  // namespace richards
