#pragma once

#include <array>
#include <string>

#include <Eigen/Core>

namespace richards {

/// Pressure head on the interior nodes, lexicographic with x fastest.
using Field = Eigen::VectorXd;

enum class Dimension { kOne, kThree };

/// Uniform tensor mesh whose outermost nodes lie on the physical boundary,
/// together with the uniform time grid.
///
/// Axis 2 is the vertical (z, positive upward). One-dimensional problems
/// live on the z axis only; their x/y entries are inert.
class ProblemGrid {
 public:
  static ProblemGrid line(int nz, double lz, int nt, double dt);
  static ProblemGrid box(const std::array<int, 3>& n,
                         const std::array<double, 3>& extent, int nt,
                         double dt);

  Dimension dimension() const { return dim_; }
  bool is_line() const { return dim_ == Dimension::kOne; }

  const std::array<int, 3>& nodes() const { return n_; }
  const std::array<double, 3>& extent() const { return extent_; }
  const std::array<double, 3>& spacing() const { return h_; }
  double hx() const { return h_[0]; }
  double hy() const { return h_[1]; }
  double hz() const { return h_[2]; }
  int steps() const { return nt_; }
  double dt() const { return dt_; }

  /// Interior nodes per axis (1 on the inert axes of a line grid).
  std::array<int, 3> interior() const;
  Eigen::Index size() const;

  /// Interior coordinates are 1-based node indices (1..N-2 on each axis).
  Eigen::Index linear_index(int i, int j, int k) const;
  std::array<int, 3> node_of(Eigen::Index index) const;

  /// Physical position (i h_x, j h_y, k h_z) of any node, boundary included.
  std::array<double, 3> position(int i, int j, int k) const;

 private:
  ProblemGrid(Dimension dim, const std::array<int, 3>& n,
              const std::array<double, 3>& extent, int nt, double dt);

  Dimension dim_;
  std::array<int, 3> n_;
  std::array<double, 3> extent_;
  std::array<double, 3> h_;
  int nt_;
  double dt_;
};

enum class BoundaryKind {
  kUniformDirichlet,  // h_r everywhere
  kTopPatch,          // saturating patch on the top face, h_r elsewhere
  kTopDirichlet,      // h_top on the whole top face, h_r elsewhere
};

std::string to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(const std::string& name);

/// Dirichlet data. The patch is {x_lo, x_hi, y_lo, y_hi} as fractions of the
/// top face extents.
struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::kUniformDirichlet;
  double h_r = -61.5;
  double h_top = 0.0;
  double alpha_bc = 1.0;
  std::array<double, 4> patch = {0.25, 0.75, 0.25, 0.75};

  void validate() const;
};

/// Value of the Dirichlet data at a boundary point. Throws
/// std::invalid_argument if the point is not on the boundary.
double boundary_value(const ProblemGrid& grid, const BoundarySpec& spec,
                      double x, double y, double z, double t = 0.0);

/// Full-node vector (all N_x N_y N_z nodes, x fastest) holding the Dirichlet
/// data on boundary nodes and zero on interior nodes.
Eigen::VectorXd boundary_frame(const ProblemGrid& grid,
                               const BoundarySpec& spec);

Field initial_field(const ProblemGrid& grid, const BoundarySpec& spec);

}  // namespace richards
