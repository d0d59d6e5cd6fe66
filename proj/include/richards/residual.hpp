#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "richards/constitutive.hpp"
#include "richards/grid.hpp"
#include "richards/quadrature.hpp"

namespace richards {

/// Interface averaging of the hydraulic conductivity. L is the lower-index
/// node of the interface, U the higher-index one.
enum class AverageKind { kArithmetic, kGeometric, kUpstream, kIntegral };

std::string to_string(AverageKind kind);
AverageKind average_kind_from_string(const std::string& name);

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

template <typename Scalar>
Scalar integral_mean(Scalar p_lo, Scalar p_hi, const VanGenuchtenParams& vg) {
  using std::abs;
  auto k = [&vg](Scalar psi) { return conductivity(psi, vg); };
  const Scalar tol = Scalar(1e-12 * vg.k_s);
  const Scalar width = p_hi - p_lo;
  // K is only C^1 at psi = 0; split there so each piece is smooth.
  Scalar integral;
  if (p_lo < Scalar(0) && p_hi > Scalar(0)) {
    integral = gauss_kronrod<Scalar>(k, p_lo, Scalar(0), tol * abs(p_lo)) +
               gauss_kronrod<Scalar>(k, Scalar(0), p_hi, tol * abs(p_hi));
  } else {
    integral = gauss_kronrod<Scalar>(k, p_lo, p_hi, tol * abs(width));
  }
  return integral / width;
}

}  // namespace detail

/// Interface conductivity from precomputed nodal values K_L = K(p_L),
/// K_U = K(p_U).
template <typename Scalar>
Scalar average_conductivity(Scalar p_L, Scalar p_U, Scalar K_L, Scalar K_U,
                            AverageKind kind, const VanGenuchtenParams& vg) {
  using std::sqrt;
  switch (kind) {
    case AverageKind::kArithmetic:
      return (K_U + K_L) / Scalar(2);
    case AverageKind::kGeometric:
      return sqrt(K_U * K_L);
    case AverageKind::kUpstream:
      return p_U - p_L >= Scalar(0) ? K_U : K_L;
    case AverageKind::kIntegral:
      if (p_L == p_U) return K_U;
      return p_L < p_U ? detail::integral_mean(p_L, p_U, vg)
                       : detail::integral_mean(p_U, p_L, vg);
  }
  return K_U;
}

template <typename Scalar>
Scalar interface_k(Scalar p_L, Scalar p_U, AverageKind kind,
                   const VanGenuchtenParams& vg) {
  return average_conductivity(p_L, p_U, conductivity(p_L, vg),
                              conductivity(p_U, vg), kind, vg);
}

/// Cell-centred finite-difference discretization of the mixed-form Richards
/// equation with backward Euler in time, on the interior nodes of a
/// ProblemGrid. Dirichlet data is read from a full-node boundary frame.
class Discretization {
 public:
  struct Options {
    /// Multiply the time term by rho*phi. The 3D operator always does; the
    /// 1D displays omit the factor, so line grids default to false.
    bool include_rho_phi = true;
    /// Source term f per interior node; empty means zero.
    Field source;
  };

  Discretization(ProblemGrid grid, BoundarySpec boundary,
                 VanGenuchtenParams params, AverageKind average);
  Discretization(ProblemGrid grid, BoundarySpec boundary,
                 VanGenuchtenParams params, AverageKind average,
                 Options options);
  /// Uses an explicit boundary frame instead of the one derived from the
  /// BoundarySpec (size N_x N_y N_z, or N_z on a line grid).
  Discretization(ProblemGrid grid, Eigen::VectorXd frame,
                 VanGenuchtenParams params, AverageKind average,
                 Options options);

  const ProblemGrid& grid() const { return grid_; }
  const BoundarySpec& boundary() const { return boundary_; }
  const VanGenuchtenParams& params() const { return params_; }
  AverageKind average() const { return average_; }
  const Eigen::VectorXd& frame() const { return frame_; }
  Eigen::Index size() const { return grid_.size(); }
  double time_coefficient() const { return time_coef_; }

  /// Phi(p) for the step p_old -> p.
  template <typename Scalar>
  VectorX<Scalar> residual(const VectorX<Scalar>& p, const Field& p_old) const;

  /// Full-node vector with the interior values of p scattered into the frame.
  template <typename Scalar>
  VectorX<Scalar> embed(const VectorX<Scalar>& p) const;

  /// Per-axis node strides in the full-node numbering, and the full index of
  /// interior node m.
  std::array<Eigen::Index, 3> strides() const;
  Eigen::Index full_index(Eigen::Index m) const;
  /// Axes carrying fluxes (z only on a line grid).
  int first_axis() const { return grid_.is_line() ? 2 : 0; }

 private:
  ProblemGrid grid_;
  BoundarySpec boundary_;
  VanGenuchtenParams params_;
  AverageKind average_;
  Eigen::VectorXd frame_;
  Field source_;
  double time_coef_ = 1.0;
};

template <typename Scalar>
VectorX<Scalar> Discretization::embed(const VectorX<Scalar>& p) const {
  if (p.size() != size())
    throw std::invalid_argument("discretization: field size mismatch");
  VectorX<Scalar> full = frame_.cast<Scalar>();
  for (Eigen::Index m = 0; m < size(); ++m) full[full_index(m)] = p[m];
  return full;
}

template <typename Scalar>
VectorX<Scalar> Discretization::residual(const VectorX<Scalar>& p,
                                         const Field& p_old) const {
  if (p_old.size() != size())
    throw std::invalid_argument("residual: previous field size mismatch");
  const VectorX<Scalar> full = embed(p);
  VectorX<Scalar> kfull(full.size());
  for (Eigen::Index g = 0; g < full.size(); ++g)
    kfull[g] = conductivity(full[g], params_);

  const auto stride = strides();
  const auto& h = grid_.spacing();
  const Scalar dt = Scalar(grid_.dt());
  const Scalar hz = Scalar(h[2]);

  VectorX<Scalar> phi(size());
  for (Eigen::Index m = 0; m < size(); ++m) {
    const Eigen::Index g = full_index(m);
    const Scalar pm = full[g];
    Scalar value = Scalar(time_coef_) *
                   (saturation(pm, params_) - Scalar(saturation(p_old[m], params_))) /
                   dt;
    for (int axis = first_axis(); axis < 3; ++axis) {
      const Scalar h2 = Scalar(h[axis] * h[axis]);
      const Eigen::Index up = g + stride[axis];
      const Eigen::Index dn = g - stride[axis];
      // q_{+1/2} - q_{-1/2} without gravity.
      const Scalar k_plus = average_conductivity(pm, full[up], kfull[g],
                                                 kfull[up], average_, params_);
      const Scalar k_minus = average_conductivity(full[dn], pm, kfull[dn],
                                                  kfull[g], average_, params_);
      value += -k_plus * (full[up] - pm) / h2 + k_minus * (pm - full[dn]) / h2;
      if (axis == 2) value += (kfull[dn] - kfull[up]) / (Scalar(2) * hz);
    }
    if (source_.size() > 0) value += Scalar(source_[m]);
    phi[m] = value;
  }
  return phi;
}

/// Phi on a 3D box grid: rho*phi time term, six flux differences, gravity
/// on the vertical fluxes and the source f (empty = 0).
Field residual_3d(const Field& p_new, const Field& p_old,
                  const ProblemGrid& grid, const BoundarySpec& spec,
                  const VanGenuchtenParams& params, AverageKind kind,
                  const Field& source = Field());

/// Phi on a line grid; the rho*phi factor is applied only on request.
Field residual_1d(const Field& p_new, const Field& p_old,
                  const ProblemGrid& grid, const BoundarySpec& spec,
                  const VanGenuchtenParams& params, AverageKind kind,
                  bool include_rho_phi = false);

}  // namespace richards
