#pragma once

// Analytic sphere machinery: NP eigenvalues of the unit sphere in any
// dimension n >= 3, real spherical harmonics on S^2 with surface gradients,
// the Unsold-family pointwise identities, the Funk-Hecke reduction of the
// single-layer identity S[(2k+1) Y] = Y, and the vanishing trace derivative
// of the eigenvalue group of order k under arbitrary normal velocities.
//
// Everything runs on non-singular quadrature (Gauss-Legendre in the polar
// angle, trapezoid in azimuth) with closed-form eigenfunctions; no 3D
// singular boundary-integral machinery.

#include "npshape/fourier.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace npshape {

struct Rational {
  long long num = 0;
  long long den = 1;

  double value() const { return double(num) / double(den); }
};

namespace detail {

inline long long gcd_ll(long long a, long long b) {
  while (b) {
    const long long t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline long long binom_ll(long long n, long long k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (long long j = 1; j <= k; ++j) {
    if (r > (9223372036854775807LL / (n - k + j)))
      throw std::overflow_error("binom_ll: overflow");
    r = r * (n - k + j) / j;
  }
  return r;
}

}  // namespace detail

// lambda_k = (1/2)(n-2)/(2k+n-2) as an exact rational; n = 2 is rejected
// (the circle has the single eigenvalue 1/2).
inline Rational np_eigenvalue(int n, int k) {
  if (n < 3) throw std::invalid_argument("np_eigenvalue: need dimension n >= 3");
  if (k < 0) throw std::invalid_argument("np_eigenvalue: need k >= 0");
  long long num = n - 2;
  long long den = 2LL * (2LL * k + n - 2);
  const long long g = detail::gcd_ll(num, den);
  return Rational{num / g, den / g};
}

// d_k = dim H_k = C(k+n-1, n-1) - C(k+n-3, n-1).
inline long long np_multiplicity(int n, int k) {
  if (n < 3) throw std::invalid_argument("np_multiplicity: need dimension n >= 3");
  if (k < 0) throw std::invalid_argument("np_multiplicity: need k >= 0");
  return detail::binom_ll(k + n - 1, n - 1) - detail::binom_ll(k + n - 3, n - 1);
}

// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on P_n.
struct GaussLegendre {
  Eigen::ArrayXd nodes, weights;
};

inline GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
  GaussLegendre out;
  out.nodes.resize(n);
  out.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    out.nodes[n - 1 - i] = x;
    out.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return out;
}

// Quadrature grid on S^2: Gauss-Legendre in cos(theta) x trapezoid in phi.
// Integrates spherical polynomials of degree <= min(2 n_theta - 1, n_phi - 1)
// exactly; weights sum to 4 pi.
struct SphereGrid {
  int n_theta = 0, n_phi = 0;
  Eigen::ArrayXd theta, phi, weight;  // flattened, size n_theta * n_phi
  Eigen::ArrayXd mu, sin_theta;       // cos(theta), sin(theta) per point

  int size() const { return n_theta * n_phi; }
};

inline SphereGrid make_sphere_grid(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 2)
    throw std::invalid_argument("make_sphere_grid: bad sizes");
  const GaussLegendre gl = gauss_legendre(n_theta);
  SphereGrid g;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  const int n = n_theta * n_phi;
  g.theta.resize(n);
  g.phi.resize(n);
  g.weight.resize(n);
  g.mu.resize(n);
  g.sin_theta.resize(n);
  const double wphi = 2.0 * pi / n_phi;
  int p = 0;
  for (int i = 0; i < n_theta; ++i) {
    const double mu = gl.nodes[i];
    const double th = std::acos(mu);
    for (int j = 0; j < n_phi; ++j, ++p) {
      g.theta[p] = th;
      g.phi[p] = 2.0 * pi * j / n_phi;
      g.weight[p] = gl.weights[i] * wphi;
      g.mu[p] = mu;
      g.sin_theta[p] = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    }
  }
  return g;
}

// Real orthonormal spherical harmonics of degree k at the grid points,
// Condon-Shortley-free, columns ordered
//   [m=0, m=1 cos, m=1 sin, ..., m=k cos, m=k sin].
// grad_theta = d Y / d theta, grad_phi = (1/sin theta) d Y / d phi, so
// |grad_S Y|^2 = grad_theta^2 + grad_phi^2. Solid-harmonic normal
// derivatives on the unit sphere are nu . grad P_{k,i} = k Y_{k,i}.
struct HarmonicBasis {
  int degree = 0;
  Eigen::MatrixXd Y, grad_theta, grad_phi;  // size() x (2k+1)

  int count() const { return 2 * degree + 1; }
};

namespace detail {

// Fully normalized associated Legendre bar-P_l^m(x) with sqrt(2l+1)/sqrt(4pi)
// folded in; the normalized recurrences keep every intermediate O(1), which
// is what makes high degrees stable.
struct LegendrePair {
  double plm = 0.0;   // bar-P_l^m(x)
  double plm1 = 0.0;  // bar-P_{l-1}^m(x) (0 when l == m)
};

inline LegendrePair normalized_legendre(int l, int m, double x) {
  double pmm = std::sqrt(1.0 / (4.0 * pi));
  const double sx = std::sqrt(std::max(0.0, 1.0 - x * x));
  for (int mm = 1; mm <= m; ++mm)
    pmm *= std::sqrt((2.0 * mm + 1.0) / (2.0 * mm)) * sx;
  if (l == m) return {pmm, 0.0};
  double p_prev = pmm;                                // l' = m
  double p_cur = std::sqrt(2.0 * m + 3.0) * x * pmm;  // l' = m+1
  for (int ll = m + 2; ll <= l; ++ll) {
    const double a = std::sqrt((4.0 * ll * ll - 1.0) / (double(ll) * ll - m * m));
    const double b =
        std::sqrt((double(ll - 1) * (ll - 1) - m * m) / (4.0 * double(ll - 1) * (ll - 1) - 1.0));
    const double p_next = a * (x * p_cur - b * p_prev);
    p_prev = p_cur;
    p_cur = p_next;
  }
  return {p_cur, p_prev};
}

}  // namespace detail

inline HarmonicBasis evaluate_harmonics(const SphereGrid& grid, int k) {
  if (k < 0) throw std::invalid_argument("evaluate_harmonics: k >= 0");
  HarmonicBasis basis;
  basis.degree = k;
  const int npts = grid.size();
  const int d = 2 * k + 1;
  basis.Y.resize(npts, d);
  basis.grad_theta.resize(npts, d);
  basis.grad_phi.resize(npts, d);
  for (int p = 0; p < npts; ++p) {
    const double x = grid.mu[p];
    const double st = grid.sin_theta[p];
    int col = 0;
    for (int m = 0; m <= k; ++m) {
      const auto [plm, plm1] = detail::normalized_legendre(k, m, x);
      // d bar-P_k^m(cos theta)/d theta = -(k x plm - c plm1)/sin theta
      const double c =
          (m == k) ? 0.0
                   : std::sqrt((2.0 * k + 1.0) * (double(k) * k - double(m) * m) /
                               (2.0 * k - 1.0));
      const double dtheta = -(k * x * plm - c * plm1) / st;
      if (m == 0) {
        basis.Y(p, col) = plm;
        basis.grad_theta(p, col) = dtheta;
        basis.grad_phi(p, col) = 0.0;
        ++col;
      } else {
        const double sq2 = std::sqrt(2.0);
        const double cm = std::cos(m * grid.phi[p]);
        const double sm = std::sin(m * grid.phi[p]);
        basis.Y(p, col) = sq2 * plm * cm;
        basis.grad_theta(p, col) = sq2 * dtheta * cm;
        basis.grad_phi(p, col) = -sq2 * plm * m * sm / st;
        ++col;
        basis.Y(p, col) = sq2 * plm * sm;
        basis.grad_theta(p, col) = sq2 * dtheta * sm;
        basis.grad_phi(p, col) = sq2 * plm * m * cm / st;
        ++col;
      }
    }
  }
  return basis;
}

// max over grid points of | sum_i Y_{k,i}^2 - d_k / (4 pi) |.
inline double unsold_check(const SphereGrid& grid, const HarmonicBasis& basis) {
  const double target = basis.count() / (4.0 * pi);
  double dev = 0.0;
  for (int p = 0; p < grid.size(); ++p)
    dev = std::max(dev, std::abs(basis.Y.row(p).squaredNorm() - target));
  return dev;
}

// Pointwise residuals of
//   sum_i |grad_S Y_{k,i}|^2 = k(k+1) sum_i Y_{k,i}^2
//   sum_i (nu . grad P_{k,i})^2 = k^2 d_k / (4 pi)   (with nu.grad P = k Y).
struct GradientIdentityReport {
  double nabla_deviation = 0.0;
  double normal_deviation = 0.0;
};

inline GradientIdentityReport gradient_identities(const SphereGrid& grid,
                                                  const HarmonicBasis& basis) {
  const int k = basis.degree;
  GradientIdentityReport out;
  const double target_nu = double(k) * k * basis.count() / (4.0 * pi);
  for (int p = 0; p < grid.size(); ++p) {
    const double y2 = basis.Y.row(p).squaredNorm();
    const double g2 = basis.grad_theta.row(p).squaredNorm() +
                      basis.grad_phi.row(p).squaredNorm();
    out.nabla_deviation =
        std::max(out.nabla_deviation, std::abs(g2 - double(k) * (k + 1) * y2));
    out.normal_deviation =
        std::max(out.normal_deviation,
                 std::abs(double(k) * k * y2 - target_nu));
  }
  return out;
}

// Trace-derivative of the eigenvalue group of degree k on the unit sphere in
// the direction of a normal velocity theta.nu:
//   sum_i int (theta.nu) ( -|grad_S Y_{k,i}|^2
//                          + (1/2+lambda_k)/(1/2-lambda_k) (k Y_{k,i})^2 ) dsigma.
// The full d_k x d_k matrix is reported as well; only its trace is claimed to
// vanish.
struct SphereClusterDerivative {
  double trace = 0.0;
  Eigen::MatrixXd matrix;
};

inline SphereClusterDerivative sphere_cluster_derivative(
    const SphereGrid& grid, const HarmonicBasis& basis,
    const Eigen::ArrayXd& theta_nu) {
  if (theta_nu.size() != grid.size())
    throw std::invalid_argument("sphere_cluster_derivative: field size mismatch");
  const int k = basis.degree;
  const double lambda = np_eigenvalue(3, k).value();
  const double eps = (0.5 + lambda) / (0.5 - lambda);
  const int d = basis.count();
  SphereClusterDerivative out;
  out.matrix.setZero(d, d);
  for (int p = 0; p < grid.size(); ++p) {
    const double w = grid.weight[p] * theta_nu[p];
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        const double g = basis.grad_theta(p, i) * basis.grad_theta(p, j) +
                         basis.grad_phi(p, i) * basis.grad_phi(p, j);
        const double nn = double(k) * k * basis.Y(p, i) * basis.Y(p, j);
        out.matrix(i, j) += w * (-g + eps * nn);
      }
    }
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j) out.matrix(i, j) = out.matrix(j, i);
  out.trace = out.matrix.trace();
  return out;
}

// Random band-limited normal velocity: sum of harmonics of degree <= lmax
// with N(0,1) coefficients, deterministic in the seed.
inline Eigen::ArrayXd random_bandlimited_field(const SphereGrid& grid, int lmax,
                                               std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::ArrayXd field = Eigen::ArrayXd::Zero(grid.size());
  for (int l = 0; l <= lmax; ++l) {
    const HarmonicBasis b = evaluate_harmonics(grid, l);
    for (int i = 0; i < b.count(); ++i) {
      const double coef = gauss(rng);
      field += coef * b.Y.col(i).array();
    }
  }
  return field;
}

namespace detail {

inline double legendre_poly(int k, double x) {
  if (k == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int l = 2; l <= k; ++l) {
    const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

template <class F>
double adaptive_simpson_rec(F&& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_quadrature(F&& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace detail

// Funk-Hecke reduction of S_{S^2}[(2k+1) Y_{k,i}] = Y_{k,i}: the zonal kernel
// integral collapses to
//   I_k = (1/2) int_{-1}^{1} P_k(t) / sqrt(2 - 2t) dt,
// computed by adaptive quadrature after the substitution t = 1 - u^2 removes
// the endpoint singularity. Reports |(2k+1) I_k - 1| and the induced
// K*-eigenvalue residual |(1/2 - k I_k) - lambda_k|.
struct FunkHeckeReport {
  double single_layer_residual = 0.0;
  double eigenvalue_residual = 0.0;
};

inline FunkHeckeReport funk_hecke_single_layer(int k) {
  if (k < 0) throw std::invalid_argument("funk_hecke_single_layer: k >= 0");
  const double sqrt2 = std::sqrt(2.0);
  const double integral = detail::adaptive_quadrature(
      [k](double u) { return detail::legendre_poly(k, 1.0 - u * u); }, 0.0, sqrt2,
      1e-14);
  const double ik = 0.5 * sqrt2 * integral;
  FunkHeckeReport out;
  out.single_layer_residual = std::abs((2.0 * k + 1.0) * ik - 1.0);
  out.eigenvalue_residual = std::abs((0.5 - k * ik) - np_eigenvalue(3, k).value());
  return out;
}

}  // namespace npshape
