#pragma once

// Polynomial extrapolation helpers: boundary limits of off-boundary potential
// evaluations and Richardson acceleration of finite-difference quotients.

#include "npshape/geometry.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace npshape {

struct ValueSlope {
  double value = 0.0;  // p(0)
  double slope = 0.0;  // p'(0)
};

// Newton-form interpolation through (xs[k], ys[k]); value and derivative of
// the interpolant at x = 0.
inline ValueSlope poly_fit_at_zero(const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  if (n == 0 || ys.size() != xs.size())
    throw std::invalid_argument("poly_fit_at_zero: bad sample set");
  std::vector<double> coef(ys);  // divided differences, in place
  for (int level = 1; level < n; ++level)
    for (int k = n - 1; k >= level; --k)
      coef[k] = (coef[k] - coef[k - 1]) / (xs[k] - xs[k - level]);
  // Horner with simultaneous derivative: p = c_{n-1}, then p <- p*(x-x_k) + c_k.
  double p = coef[n - 1], dp = 0.0;
  for (int k = n - 2; k >= 0; --k) {
    dp = dp * (0.0 - xs[k]) + p;
    p = p * (0.0 - xs[k]) + coef[k];
  }
  return {p, dp};
}

// Richardson extrapolation of quotients d(t_k) whose error expands in powers
// of t^order (order 2 for central differences, 1 for one-sided).
inline double richardson(const std::vector<double>& steps,
                         const std::vector<double>& quotients, int order) {
  std::vector<double> xs(steps.size());
  for (size_t k = 0; k < steps.size(); ++k) {
    double u = steps[k];
    for (int p = 1; p < order; ++p) u *= steps[k];
    xs[k] = u;
  }
  return poly_fit_at_zero(xs, quotients).value;
}

// One-sided limits of a scalar field F along the normal through node i:
// samples F(x_i -(interior)/+(exterior) delta nu_i) at the given offsets and
// fits a polynomial in delta. `slope` is converted to the outward normal
// derivative.
template <class F>
ValueSlope boundary_limit(const Curve& c, int node, Side side,
                          const std::vector<double>& offsets, F&& field) {
  const Vector2d x0 = c.node(node);
  const Vector2d nu = c.nu(node);
  const double dir = (side == Side::Interior) ? -1.0 : 1.0;
  std::vector<double> ys(offsets.size());
  for (size_t k = 0; k < offsets.size(); ++k)
    ys[k] = field(Vector2d(x0 + dir * offsets[k] * nu));
  ValueSlope vs = poly_fit_at_zero(offsets, ys);
  vs.slope *= dir;  // d/d(offset) -> d/d(nu)
  return vs;
}

// Offsets in multiples of the mean node spacing, h*(start + step*k). The
// defaults pair with quadrature on a grid upsampled ~16x, where offsets of a
// fraction of the coarse spacing are still many fine spacings away.
inline std::vector<double> default_offsets(const Curve& c, double start = 0.5,
                                           double step = 0.25, int count = 8) {
  const double h = c.circumference() / c.size();
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = h * (start + step * k);
  return out;
}

}  // namespace npshape
