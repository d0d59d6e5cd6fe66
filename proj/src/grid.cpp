#include "richards/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace richards {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

ProblemGrid::ProblemGrid(Dimension dim, const std::array<int, 3>& n,
                         const std::array<double, 3>& extent, int nt,
                         double dt)
    : dim_(dim), n_(n), extent_(extent), h_{0.0, 0.0, 0.0}, nt_(nt), dt_(dt) {
  require(nt >= 0, "grid: number of time steps must be non-negative");
  require(dt > 0.0 && std::isfinite(dt), "grid: dt must be positive");
  const int first_axis = dim == Dimension::kOne ? 2 : 0;
  for (int a = first_axis; a < 3; ++a) {
    require(n[a] >= 3, "grid: each axis needs at least 3 nodes");
    require(extent[a] > 0.0 && std::isfinite(extent[a]),
            "grid: extents must be positive");
    h_[a] = extent[a] / static_cast<double>(n[a] - 1);
  }
}

ProblemGrid ProblemGrid::line(int nz, double lz, int nt, double dt) {
  return ProblemGrid(Dimension::kOne, {1, 1, nz}, {0.0, 0.0, lz}, nt, dt);
}

ProblemGrid ProblemGrid::box(const std::array<int, 3>& n,
                             const std::array<double, 3>& extent, int nt,
                             double dt) {
  return ProblemGrid(Dimension::kThree, n, extent, nt, dt);
}

std::array<int, 3> ProblemGrid::interior() const {
  if (is_line()) return {1, 1, n_[2] - 2};
  return {n_[0] - 2, n_[1] - 2, n_[2] - 2};
}

Eigen::Index ProblemGrid::size() const {
  const auto m = interior();
  return static_cast<Eigen::Index>(m[0]) * m[1] * m[2];
}

Eigen::Index ProblemGrid::linear_index(int i, int j, int k) const {
  const auto m = interior();
  if (i < 1 || i > m[0] || j < 1 || j > m[1] || k < 1 || k > m[2])
    throw std::out_of_range("grid: interior coordinates out of range");
  return (static_cast<Eigen::Index>(k - 1) * m[1] + (j - 1)) * m[0] + (i - 1);
}

std::array<int, 3> ProblemGrid::node_of(Eigen::Index index) const {
  if (index < 0 || index >= size())
    throw std::out_of_range("grid: linear index out of range");
  const auto m = interior();
  const int i = static_cast<int>(index % m[0]);
  const Eigen::Index rest = index / m[0];
  const int j = static_cast<int>(rest % m[1]);
  const int k = static_cast<int>(rest / m[1]);
  return {i + 1, j + 1, k + 1};
}

std::array<double, 3> ProblemGrid::position(int i, int j, int k) const {
  return {i * h_[0], j * h_[1], k * h_[2]};
}

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::kUniformDirichlet:
      return "uniform_dirichlet";
    case BoundaryKind::kTopPatch:
      return "top_patch";
    case BoundaryKind::kTopDirichlet:
      return "top_dirichlet";
  }
  return "unknown";
}

BoundaryKind boundary_kind_from_string(const std::string& name) {
  if (name == "uniform_dirichlet") return BoundaryKind::kUniformDirichlet;
  if (name == "top_patch") return BoundaryKind::kTopPatch;
  if (name == "top_dirichlet") return BoundaryKind::kTopDirichlet;
  throw std::invalid_argument("unknown boundary kind '" + name + "'");
}

void BoundarySpec::validate() const {
  require(std::isfinite(h_r), "boundary: h_r must be finite");
  require(std::isfinite(h_top), "boundary: h_top must be finite");
  require(alpha_bc > 0.0 && std::isfinite(alpha_bc),
          "boundary: alpha_bc must be positive");
  for (double f : patch)
    require(f >= 0.0 && f <= 1.0, "boundary: patch fractions must lie in [0,1]");
  require(patch[0] <= patch[1] && patch[2] <= patch[3],
          "boundary: patch fractions must be ordered lo <= hi");
}

namespace {

// Patch formula (1/alpha) ln[exp(alpha h_r) + (1 - exp(alpha h_r)) chi].
// chi is 0 or 1, so the two branches are evaluated in closed form: this
// avoids exp underflow for strongly negative alpha h_r.
double patch_value(const BoundarySpec& spec, bool inside) {
  if (!inside) return spec.h_r;
  const double e = std::exp(spec.alpha_bc * spec.h_r);
  return std::log(e + (1.0 - e)) / spec.alpha_bc;
}

bool near(double a, double b, double scale) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, scale);
}

}  // namespace

double boundary_value(const ProblemGrid& grid, const BoundarySpec& spec,
                      double x, double y, double z, double /*t*/) {
  const auto& L = grid.extent();
  const bool on_top = near(z, L[2], L[2]);
  bool on_boundary = on_top || near(z, 0.0, L[2]);
  if (!grid.is_line()) {
    on_boundary = on_boundary || near(x, 0.0, L[0]) || near(x, L[0], L[0]) ||
                  near(y, 0.0, L[1]) || near(y, L[1], L[1]);
  }
  if (!on_boundary)
    throw std::invalid_argument("boundary_value: point is not on the boundary");

  switch (spec.kind) {
    case BoundaryKind::kUniformDirichlet:
      return spec.h_r;
    case BoundaryKind::kTopDirichlet:
      return on_top ? spec.h_top : spec.h_r;
    case BoundaryKind::kTopPatch: {
      if (!on_top) return spec.h_r;
      if (grid.is_line()) return patch_value(spec, true);
      const double tol_x = 1e-12 * L[0];
      const double tol_y = 1e-12 * L[1];
      const bool inside = x >= spec.patch[0] * L[0] - tol_x &&
                          x <= spec.patch[1] * L[0] + tol_x &&
                          y >= spec.patch[2] * L[1] - tol_y &&
                          y <= spec.patch[3] * L[1] + tol_y;
      return patch_value(spec, inside);
    }
  }
  return spec.h_r;
}

Eigen::VectorXd boundary_frame(const ProblemGrid& grid,
                               const BoundarySpec& spec) {
  if (grid.is_line()) {
    const int nz = grid.nodes()[2];
    Eigen::VectorXd frame = Eigen::VectorXd::Zero(nz);
    frame[0] = boundary_value(grid, spec, 0.0, 0.0, 0.0);
    frame[nz - 1] = boundary_value(grid, spec, 0.0, 0.0, grid.extent()[2]);
    return frame;
  }
  const auto& n = grid.nodes();
  Eigen::VectorXd frame =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n[0]) * n[1] * n[2]);
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        const bool interior = i > 0 && i < n[0] - 1 && j > 0 &&
                              j < n[1] - 1 && k > 0 && k < n[2] - 1;
        if (interior) continue;
        const auto x = grid.position(i, j, k);
        frame[(static_cast<Eigen::Index>(k) * n[1] + j) * n[0] + i] =
            boundary_value(grid, spec, x[0], x[1], x[2]);
      }
  return frame;
}

Field initial_field(const ProblemGrid& grid, const BoundarySpec& spec) {
  return Field::Constant(grid.size(), spec.h_r);
}

}  // namespace richards
