#pragma once

#include <cmath>
#include <limits>

#include "hysens/core.hpp"

namespace hysens::fd {

/// Central-difference step for coordinate value x: eps^(1/3) * max(1, |x|).
[[nodiscard]] inline double central_step(double x) {
  static const double kCbrtEps = std::cbrt(std::numeric_limits<double>::epsilon());
  return kCbrtEps * std::max(1.0, std::abs(x));
}

/// Central-difference Jacobian of fn at x. fn maps Vector -> Vector.
template <class Fn>
[[nodiscard]] Matrix jacobian(Fn&& fn, const Vector& x) {
  Matrix J;
  if (x.size() == 0) return Matrix(fn(x).size(), 0);
  Vector xp = x;
  for (Index j = 0; j < x.size(); ++j) {
    const double h = central_step(x[j]);
    xp[j] = x[j] + h;
    const Vector fp = fn(xp);
    xp[j] = x[j] - h;
    const Vector fm = fn(xp);
    xp[j] = x[j];
    if (j == 0) J.resize(fp.size(), x.size());
    J.col(j) = (fp - fm) / (2.0 * h);
  }
  return J;
}

/// Central-difference derivative of a vector-valued function of one scalar.
template <class Fn>
[[nodiscard]] Vector derivative(Fn&& fn, double x) {
  const double h = central_step(x);
  return (fn(x + h) - fn(x - h)) / (2.0 * h);
}

}  // namespace hysens::fd
