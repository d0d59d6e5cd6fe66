#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace richards {

/// Adaptive 7-15 point Gauss-Kronrod quadrature on [a, b]. Bisects the
/// interval with the largest error estimate until the summed estimate is
/// below abs_tol or max_intervals is reached.
template <typename Scalar, typename F>
Scalar gauss_kronrod(F&& f, Scalar a, Scalar b, Scalar abs_tol,
                     int max_intervals = 200) {
  static constexpr long double kNodes[8] = {
      0.991455371120812639206854697526329L, 0.949107912342758524526189684047851L,
      0.864864423359769072789712788640926L, 0.741531185599394439863864773280788L,
      0.586087235467691130294144845693013L, 0.405845151377397166906606412076961L,
      0.207784955007898467600689403773245L, 0.000000000000000000000000000000000L};
  static constexpr long double kKronrod[8] = {
      0.022935322010529224963732008058970L, 0.063092092629978553290700663189204L,
      0.104790010322250183839876322541518L, 0.140653259715525918745189590510238L,
      0.169004726639267902826583426598550L, 0.190350578064785409913256402421014L,
      0.204432940075298892414161999234649L, 0.209482141084727828012999174891714L};
  static constexpr long double kGauss[4] = {
      0.129484966168869693270611432679082L, 0.279705391489276667901467771423780L,
      0.381830050505118944950369775488975L, 0.417959183673469387755102040816327L};

  struct Piece {
    Scalar lo, hi, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };

  auto rule = [&](Scalar lo, Scalar hi) {
    using std::abs;
    const Scalar c = (lo + hi) / Scalar(2);
    const Scalar r = (hi - lo) / Scalar(2);
    const Scalar fc = f(c);
    Scalar kron = Scalar(kKronrod[7]) * fc;
    Scalar gauss = Scalar(kGauss[3]) * fc;
    for (int i = 0; i < 7; ++i) {
      const Scalar dx = r * Scalar(kNodes[i]);
      const Scalar s = f(c - dx) + f(c + dx);
      kron += Scalar(kKronrod[i]) * s;
      if (i % 2 == 1) gauss += Scalar(kGauss[i / 2]) * s;
    }
    return Piece{lo, hi, kron * r, abs((kron - gauss) * r)};
  };

  std::priority_queue<Piece> pieces;
  pieces.push(rule(a, b));
  Scalar total = pieces.top().value;
  Scalar error = pieces.top().error;
  int count = 1;
  while (error > abs_tol && count < max_intervals) {
    const Piece worst = pieces.top();
    pieces.pop();
    const Scalar mid = (worst.lo + worst.hi) / Scalar(2);
    const Piece left = rule(worst.lo, mid);
    const Piece right = rule(mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    pieces.push(left);
    pieces.push(right);
    ++count;
  }
  return total;
}

}  // namespace richards
