#pragma once

// Periodic spectral building blocks shared by the geometry and layer-potential
// code: the equispaced grid on [0, 2*pi), trigonometric differentiation, the
// Kussmaul-Martensen weights for the periodic log kernel, and the parity
// (alternate-point) trapezoidal rule used for principal value integrals.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace npshape {

inline constexpr double pi = 3.14159265358979323846264338327950288;

// t_j = 2*pi*j/N, j = 0..N-1. N must be even and >= 16 for curve grids,
// but the raw grid helper accepts any N >= 2.
inline Eigen::ArrayXd periodic_grid(int n) {
  if (n < 2) throw std::invalid_argument("periodic_grid: need n >= 2");
  Eigen::ArrayXd t(n);
  for (int j = 0; j < n; ++j) t[j] = 2.0 * pi * j / n;
  return t;
}

// Trigonometric differentiation matrix on the equispaced periodic grid,
// exact for trigonometric polynomials of degree < N/2 (N even):
//   D(i,j) = (1/2) (-1)^(i-j) cot((t_i - t_j)/2),  D(i,i) = 0.
inline Eigen::MatrixXd trig_diff_matrix(int n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("trig_diff_matrix: n must be even and >= 2");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const double h = 2.0 * pi / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int k = i - j;
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = 0.5 * sgn / std::tan(0.5 * h * k);
    }
  }
  return d;
}

// Kussmaul-Martensen quadrature for the 2*pi-periodic logarithmic kernel:
//   integral_0^{2pi} log(4 sin^2((t_i - s)/2)) f(s) ds  ~=  sum_j R(i,j) f(s_j)
// with
//   R(i,j) = -(4 pi / N) sum_{m=1}^{N/2-1} cos(m (t_i - t_j)) / m
//            - (4 pi / N^2) cos((N/2) (t_i - t_j)).
// Exact for trigonometric polynomials f of degree <= N/2 (cosine part).
inline Eigen::MatrixXd kress_log_weights(int n) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("kress_log_weights: n must be even and >= 4");
  const double h = 2.0 * pi / n;
  Eigen::ArrayXd r(n);  // depends on (i - j) mod n only
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int m = 1; m < n / 2; ++m) acc += std::cos(m * k * h) / m;
    r[k] = -(4.0 * pi / n) * acc -
           (4.0 * pi / (double(n) * n)) * std::cos(0.5 * n * k * h);
  }
  Eigen::MatrixXd w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w(i, j) = r[((i - j) % n + n) % n];
  return w;
}

// Trigonometric interpolation from the N-point grid to the M-point grid
// (both equispaced, N even). Row i of the returned M x N matrix evaluates the
// trigonometric cardinal interpolant at t = 2*pi*i/M:
//   K(d) = sin(N d / 2) cot(d / 2) / N,  K(0) = 1.
inline Eigen::MatrixXd trig_interp_matrix(int n, int m) {
  if (n < 2 || n % 2 != 0 || m < n)
    throw std::invalid_argument("trig_interp_matrix: need even n and m >= n");
  Eigen::MatrixXd p(m, n);
  for (int i = 0; i < m; ++i) {
    const double ti = 2.0 * pi * i / m;
    for (int j = 0; j < n; ++j) {
      const double d = ti - 2.0 * pi * j / n;
      const double s = std::sin(0.5 * d);
      p(i, j) = (std::abs(s) < 1e-14)
                    ? 1.0
                    : std::sin(0.5 * n * d) * std::cos(0.5 * d) / (n * s);
    }
  }
  return p;
}

// Alternate-point (parity) trapezoidal rule for principal value integrals on
// the periodic grid: for an integrand with a simple pole at s = t_i,
//   pv integral_0^{2pi} g(s) ds  ~=  2h * sum_{j : (j-i) odd} g(s_j).
// The excluded same-parity nodes are symmetric about the singularity, so the
// odd part of the pole cancels and the rule is exact for
// cot((s-t_i)/2) * (trig polynomial of degree < N/2).
//
// Callers loop over opposite-parity j themselves; this helper only exposes
// the weight.
inline double pv_parity_weight(int n) { return 2.0 * (2.0 * pi / n); }

}  // namespace npshape
