#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Core>

namespace richards {

/// Van Genuchten (Celia-type) constants for the mixed-form Richards model.
///
/// s(p) = alpha (s_s - s_r) / (alpha + |p|^beta) + s_r
/// K(p) = k_s a / (a + |p|^gamma)
///
/// Units follow the data set: pressure head and lengths in cm, time in s.
struct VanGenuchtenParams {
  double alpha = 1.611e6;
  double beta = 3.96;
  double gamma = 4.74;
  double a = 1.175e6;
  double s_s = 0.287;
  double s_r = 0.075;
  double k_s = 0.00944;
  double rho = 1.0;
  double phi = 1.0;

  /// When set, p >= 0 is treated as fully saturated: s = s_s, K = k_s and
  /// both derivatives vanish.
  bool clamp_saturated = false;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;

  double rho_phi() const { return rho * phi; }
};

namespace detail {

// |p|^e evaluated as exp(e ln|p|); the |p| -> 0 branch returns 0.
template <typename Scalar>
Scalar abs_pow(Scalar p, double e) {
  using std::abs;
  using std::exp;
  using std::log;
  const Scalar ap = abs(p);
  if (ap == Scalar(0)) return Scalar(0);
  return exp(Scalar(e) * log(ap));
}

template <typename Scalar>
void require_finite(Scalar p, const char* what) {
  using std::isfinite;
  if (!isfinite(p))
    throw std::domain_error(std::string(what) + ": pressure head is not finite");
}

template <typename Scalar>
Scalar sign(Scalar p) {
  return p > Scalar(0) ? Scalar(1) : (p < Scalar(0) ? Scalar(-1) : Scalar(0));
}

/// Real scalar types (double, long double, multiprecision); excludes Eigen
/// expressions so the coefficient-wise overloads are selected for those.
template <typename T>
concept RealScalar = !std::is_base_of_v<Eigen::EigenBase<T>, T>;

}  // namespace detail

template <detail::RealScalar Scalar>
Scalar saturation(Scalar p, const VanGenuchtenParams& vg) {
  detail::require_finite(p, "saturation");
  if (vg.clamp_saturated && p >= Scalar(0)) return Scalar(vg.s_s);
  const Scalar pb = detail::abs_pow(p, vg.beta);
  return Scalar(vg.alpha) * Scalar(vg.s_s - vg.s_r) / (Scalar(vg.alpha) + pb) +
         Scalar(vg.s_r);
}

template <detail::RealScalar Scalar>
Scalar conductivity(Scalar p, const VanGenuchtenParams& vg) {
  detail::require_finite(p, "conductivity");
  if (vg.clamp_saturated && p >= Scalar(0)) return Scalar(vg.k_s);
  const Scalar pg = detail::abs_pow(p, vg.gamma);
  return Scalar(vg.k_s) * Scalar(vg.a) / (Scalar(vg.a) + pg);
}

/// ds/dp; defined as 0 at p = 0 (continuous extension for beta > 1).
template <detail::RealScalar Scalar>
Scalar d_saturation(Scalar p, const VanGenuchtenParams& vg) {
  detail::require_finite(p, "d_saturation");
  if (p == Scalar(0) || (vg.clamp_saturated && p > Scalar(0))) return Scalar(0);
  const Scalar pb = detail::abs_pow(p, vg.beta);
  const Scalar pbm1 = detail::abs_pow(p, vg.beta - 1.0);
  const Scalar den = Scalar(vg.alpha) + pb;
  return -Scalar(vg.alpha * vg.beta) * pbm1 * detail::sign(p) *
         Scalar(vg.s_s - vg.s_r) / (den * den);
}

/// dK/dp; defined as 0 at p = 0 (continuous extension for gamma > 1).
template <detail::RealScalar Scalar>
Scalar d_conductivity(Scalar p, const VanGenuchtenParams& vg) {
  detail::require_finite(p, "d_conductivity");
  if (p == Scalar(0) || (vg.clamp_saturated && p > Scalar(0))) return Scalar(0);
  const Scalar pg = detail::abs_pow(p, vg.gamma);
  const Scalar pgm1 = detail::abs_pow(p, vg.gamma - 1.0);
  const Scalar den = Scalar(vg.a) + pg;
  return -Scalar(vg.a * vg.gamma * vg.k_s) * pgm1 * detail::sign(p) /
         (den * den);
}

// Coefficient-wise versions over a pressure field.

template <typename Derived>
Eigen::ArrayXd saturation(const Eigen::DenseBase<Derived>& p,
                          const VanGenuchtenParams& vg) {
  return p.derived().array().unaryExpr(
      [&vg](double v) { return saturation(v, vg); });
}

template <typename Derived>
Eigen::ArrayXd conductivity(const Eigen::DenseBase<Derived>& p,
                            const VanGenuchtenParams& vg) {
  return p.derived().array().unaryExpr(
      [&vg](double v) { return conductivity(v, vg); });
}

template <typename Derived>
Eigen::ArrayXd d_saturation(const Eigen::DenseBase<Derived>& p,
                            const VanGenuchtenParams& vg) {
  return p.derived().array().unaryExpr(
      [&vg](double v) { return d_saturation(v, vg); });
}

template <typename Derived>
Eigen::ArrayXd d_conductivity(const Eigen::DenseBase<Derived>& p,
                              const VanGenuchtenParams& vg) {
  return p.derived().array().unaryExpr(
      [&vg](double v) { return d_conductivity(v, vg); });
}

}  // namespace richards
