#pragma once

// Smooth closed planar boundaries on an equispaced parameter grid, their
// perturbations x + t*theta, and the tangential calculus (tangential
// gradient, surface divergence) used by the shape-derivative formulas.
//
// All geometry is derived from analytic parametrization derivatives sampled
// at t_j = 2*pi*j/N; periodic spectral differentiation supplies derivatives
// of node-sampled data.

#include "npshape/fourier.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace npshape {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

using MatrixX2d = Eigen::Matrix<double, Eigen::Dynamic, 2>;

enum class Side { Interior, Exterior };

// Closed C^infinity boundary sampled at t_j = 2*pi*j/N. Immutable after
// construction. The outward normal is the tangent rotated by -pi/2; the
// signed curvature is positive for a circle with outward normal.
class Curve {
 public:
  // Builds all derived fields from samples of x, x', x'' at the grid nodes.
  // Throws std::invalid_argument on degenerate speed, inward orientation, or
  // the self-intersection heuristic (two non-adjacent nodes closer than half
  // the minimal adjacent spacing).
  Curve(MatrixX2d nodes, MatrixX2d d1, MatrixX2d d2, std::string descriptor)
      : nodes_(std::move(nodes)),
        d1_(std::move(d1)),
        d2_(std::move(d2)),
        descriptor_(std::move(descriptor)) {
    const int n = static_cast<int>(nodes_.rows());
    if (n < 16 || n % 2 != 0)
      throw std::invalid_argument("Curve: node count must be even and >= 16");
    if (d1_.rows() != n || d2_.rows() != n)
      throw std::invalid_argument("Curve: derivative sample size mismatch");
    params_ = periodic_grid(n);
    speed_.resize(n);
    curvature_.resize(n);
    weights_.resize(n);
    tangent_.resize(n, 2);
    normal_.resize(n, 2);
    for (int i = 0; i < n; ++i) {
      const double sp = d1_.row(i).norm();
      if (!(sp > 1e-14))
        throw std::invalid_argument("Curve: degenerate parametrization (zero speed)");
      speed_[i] = sp;
      tangent_.row(i) = d1_.row(i) / sp;
      normal_(i, 0) = tangent_(i, 1);
      normal_(i, 1) = -tangent_(i, 0);
      const double cross = d1_(i, 0) * d2_(i, 1) - d1_(i, 1) * d2_(i, 0);
      curvature_[i] = cross / (sp * sp * sp);
      weights_[i] = (2.0 * pi / n) * sp;
    }
    if (enclosed_area() <= 0.0)
      throw std::invalid_argument("Curve: parametrization is not counterclockwise");
    check_simple();
  }

  int size() const { return static_cast<int>(nodes_.rows()); }
  const MatrixX2d& nodes() const { return nodes_; }
  const MatrixX2d& velocity() const { return d1_; }
  const MatrixX2d& acceleration() const { return d2_; }
  const MatrixX2d& tangent() const { return tangent_; }
  const MatrixX2d& normal() const { return normal_; }
  const ArrayXd& params() const { return params_; }
  const ArrayXd& speed() const { return speed_; }
  const ArrayXd& curvature() const { return curvature_; }
  const ArrayXd& weights() const { return weights_; }
  const std::string& descriptor() const { return descriptor_; }

  Vector2d node(int i) const { return nodes_.row(i).transpose(); }
  Vector2d nu(int i) const { return normal_.row(i).transpose(); }
  Vector2d tau(int i) const { return tangent_.row(i).transpose(); }

  // (1/2) sum w_i (x_i . nu_i); positive for outward orientation.
  double enclosed_area() const {
    double a = 0.0;
    for (int i = 0; i < size(); ++i)
      a += weights_[i] * nodes_.row(i).dot(normal_.row(i));
    return 0.5 * a;
  }

  double circumference() const { return weights_.sum(); }

  // Minimal distance between adjacent nodes.
  double min_spacing() const {
    const int n = size();
    double m = (nodes_.row(0) - nodes_.row(n - 1)).norm();
    for (int i = 0; i + 1 < n; ++i)
      m = std::min(m, (nodes_.row(i + 1) - nodes_.row(i)).norm());
    return m;
  }

 private:
  void check_simple() const {
    const int n = size();
    const double limit = 0.5 * min_spacing();
    for (int i = 0; i < n; ++i) {
      for (int j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;  // adjacent through the seam
        if ((nodes_.row(i) - nodes_.row(j)).norm() < limit)
          throw std::invalid_argument(
              "Curve: self-intersection heuristic failed near nodes " +
              std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }

  MatrixX2d nodes_, d1_, d2_;
  std::string descriptor_;
  ArrayXd params_, speed_, curvature_, weights_;
  MatrixX2d tangent_, normal_;
};

namespace detail {

template <class F0, class F1, class F2>
Curve sample_parametrization(int n, F0&& x, F1&& xp, F2&& xpp,
                             const std::string& descriptor) {
  const ArrayXd t = periodic_grid(n);
  MatrixX2d p(n, 2), d1(n, 2), d2(n, 2);
  for (int i = 0; i < n; ++i) {
    p.row(i) = x(t[i]).transpose();
    d1.row(i) = xp(t[i]).transpose();
    d2.row(i) = xpp(t[i]).transpose();
  }
  return Curve(std::move(p), std::move(d1), std::move(d2), descriptor);
}

}  // namespace detail

inline Curve build_circle(double r, int n) {
  if (!(r > 0.0)) throw std::invalid_argument("build_circle: radius must be positive");
  return detail::sample_parametrization(
      n, [r](double t) { return Vector2d(r * std::cos(t), r * std::sin(t)); },
      [r](double t) { return Vector2d(-r * std::sin(t), r * std::cos(t)); },
      [r](double t) { return Vector2d(-r * std::cos(t), -r * std::sin(t)); },
      "circle:" + std::to_string(r));
}

inline Curve build_ellipse(double a, double b, int n) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("build_ellipse: semi-axes must be positive");
  return detail::sample_parametrization(
      n, [a, b](double t) { return Vector2d(a * std::cos(t), b * std::sin(t)); },
      [a, b](double t) { return Vector2d(-a * std::sin(t), b * std::cos(t)); },
      [a, b](double t) { return Vector2d(-a * std::cos(t), -b * std::sin(t)); },
      "ellipse:" + std::to_string(a) + "," + std::to_string(b));
}

// r(t) = c0 + sum_k amp_k cos(freq_k t), boundary (r cos t, r sin t).
// Requires r > 0 everywhere.
struct StarTerm {
  int freq = 0;
  double amp = 0.0;
};

inline Curve build_star(double c0, const std::vector<StarTerm>& terms, int n) {
  auto r = [&](double t) {
    double v = c0;
    for (const auto& s : terms) v += s.amp * std::cos(s.freq * t);
    return v;
  };
  auto rp = [&](double t) {
    double v = 0.0;
    for (const auto& s : terms) v -= s.amp * s.freq * std::sin(s.freq * t);
    return v;
  };
  auto rpp = [&](double t) {
    double v = 0.0;
    for (const auto& s : terms) v -= s.amp * s.freq * s.freq * std::cos(s.freq * t);
    return v;
  };
  for (int i = 0; i < 4096; ++i) {
    if (!(r(2.0 * pi * i / 4096) > 0.0))
      throw std::invalid_argument("build_star: radial function must stay positive");
  }
  std::string d = "star:" + std::to_string(c0);
  for (const auto& s : terms)
    d += "," + std::to_string(s.amp) + "@" + std::to_string(s.freq);
  return detail::sample_parametrization(
      n,
      [&](double t) {
        return Vector2d(r(t) * std::cos(t), r(t) * std::sin(t));
      },
      [&](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return Vector2d(rp(t) * c - r(t) * s, rp(t) * s + r(t) * c);
      },
      [&](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return Vector2d(rpp(t) * c - 2.0 * rp(t) * s - r(t) * c,
                        rpp(t) * s + 2.0 * rp(t) * c - r(t) * s);
      },
      d);
}

// Kress kite: (cos t + 0.65 cos 2t - 0.65, 1.5 sin t).
inline Curve build_kite(int n) {
  return detail::sample_parametrization(
      n,
      [](double t) {
        return Vector2d(std::cos(t) + 0.65 * std::cos(2 * t) - 0.65, 1.5 * std::sin(t));
      },
      [](double t) {
        return Vector2d(-std::sin(t) - 1.3 * std::sin(2 * t), 1.5 * std::cos(t));
      },
      [](double t) {
        return Vector2d(-std::cos(t) - 2.6 * std::cos(2 * t), -1.5 * std::sin(t));
      },
      "kite");
}

// Vector field theta sampled on the nodes of a host curve, together with its
// parametric derivative (needed to rebuild geometry after a perturbation and
// for the tangential Jacobian). Fields are stored on the reference grid and
// pushed forward by parameter identification.
class PerturbationField {
 public:
  PerturbationField(MatrixX2d values, MatrixX2d dvalues, std::string descriptor)
      : values_(std::move(values)),
        dvalues_(std::move(dvalues)),
        descriptor_(std::move(descriptor)) {
    if (values_.rows() != dvalues_.rows())
      throw std::invalid_argument("PerturbationField: size mismatch");
  }

  // Parametric derivative filled by spectral differentiation of the samples.
  static PerturbationField from_values(const Curve& c, MatrixX2d values,
                                       std::string descriptor) {
    const MatrixXd d = trig_diff_matrix(static_cast<int>(values.rows()));
    MatrixX2d dv = d * values;
    return PerturbationField(std::move(values), std::move(dv), std::move(descriptor));
  }

  template <class F>
  static PerturbationField from_function(const Curve& c, F&& f, std::string descriptor) {
    const int n = c.size();
    MatrixX2d v(n, 2);
    for (int i = 0; i < n; ++i) v.row(i) = f(c.params()[i], c.node(i)).transpose();
    return from_values(c, std::move(v), std::move(descriptor));
  }

  static PerturbationField dilation(const Curve& c) {
    MatrixX2d v = c.nodes();
    MatrixX2d dv = c.velocity();
    return PerturbationField(std::move(v), std::move(dv), "dilation");
  }

  static PerturbationField translation(const Curve& c, const Vector2d& zeta) {
    MatrixX2d v(c.size(), 2), dv = MatrixX2d::Zero(c.size(), 2);
    v.col(0).setConstant(zeta[0]);
    v.col(1).setConstant(zeta[1]);
    return PerturbationField(std::move(v), std::move(dv), "translation");
  }

  // theta(x) = Z x with Z = [[0,-1],[1,0]] scaled by omega.
  static PerturbationField rotation(const Curve& c, double omega = 1.0) {
    MatrixX2d v(c.size(), 2), dv(c.size(), 2);
    v.col(0) = -omega * c.nodes().col(1);
    v.col(1) = omega * c.nodes().col(0);
    dv.col(0) = -omega * c.velocity().col(1);
    dv.col(1) = omega * c.velocity().col(0);
    return PerturbationField(std::move(v), std::move(dv), "rotation");
  }

  static PerturbationField normal_bump(const Curve& c, const VectorXd& a,
                                       std::string descriptor) {
    MatrixX2d v(c.size(), 2);
    for (int i = 0; i < c.size(); ++i) v.row(i) = a[i] * c.normal().row(i);
    return from_values(c, std::move(v), std::move(descriptor));
  }

  const MatrixX2d& values() const { return values_; }
  const MatrixX2d& dvalues() const { return dvalues_; }
  const std::string& descriptor() const { return descriptor_; }
  int size() const { return static_cast<int>(values_.rows()); }

  Vector2d at(int i) const { return values_.row(i).transpose(); }

  // theta . nu at the nodes.
  VectorXd normal_component(const Curve& c) const {
    VectorXd out(size());
    for (int i = 0; i < size(); ++i) out[i] = values_.row(i).dot(c.normal().row(i));
    return out;
  }

  // theta - (theta . nu) nu; exactly tangential at the nodes.
  PerturbationField tangential_part(const Curve& c) const {
    const VectorXd tn = normal_component(c);
    MatrixX2d v(size(), 2);
    for (int i = 0; i < size(); ++i)
      v.row(i) = values_.row(i) - tn[i] * c.normal().row(i);
    return from_values(c, std::move(v), descriptor_ + "+tangential");
  }

  PerturbationField scaled(double a) const {
    return PerturbationField(a * values_, a * dvalues_, descriptor_);
  }

 private:
  MatrixX2d values_, dvalues_;
  std::string descriptor_;
};

// Curve with nodes x_i + t*theta_i on the same parameter grid; realizes the
// fixed-grid pullback of the perturbed boundary. Throws when the perturbed
// curve trips the self-intersection heuristic.
inline Curve perturb(const Curve& c, const PerturbationField& theta, double t) {
  if (theta.size() != c.size())
    throw std::invalid_argument("perturb: field/grid size mismatch");
  MatrixX2d p = c.nodes() + t * theta.values();
  MatrixX2d d1 = c.velocity() + t * theta.dvalues();
  const MatrixXd dm = trig_diff_matrix(c.size());
  MatrixX2d d2 = c.acceleration() + t * (dm * theta.dvalues());
  return Curve(std::move(p), std::move(d1), std::move(d2),
               c.descriptor() + "+t*" + theta.descriptor());
}

// Resamples the curve on a grid refined by an integer factor, by
// trigonometric interpolation of the position/derivative samples. Exact for
// band-limited parametrizations; spectrally accurate otherwise.
inline Curve refine(const Curve& c, int factor) {
  if (factor < 1) throw std::invalid_argument("refine: factor must be >= 1");
  const int m = c.size() * factor;
  const MatrixXd p = trig_interp_matrix(c.size(), m);
  return Curve(p * c.nodes(), p * c.velocity(), p * c.acceleration(),
               c.descriptor());
}

// d/ds along the curve of node-sampled data (spectral).
inline VectorXd arclength_derivative(const Curve& c, const VectorXd& f) {
  if (f.size() != c.size())
    throw std::invalid_argument("arclength_derivative: size mismatch");
  const MatrixXd d = trig_diff_matrix(c.size());
  VectorXd df = d * f;
  for (int i = 0; i < c.size(); ++i) df[i] /= c.speed()[i];
  return df;
}

// grad_dOmega f = (df/ds) tau; zero normal component by construction.
inline MatrixX2d tangential_gradient(const Curve& c, const VectorXd& f) {
  const VectorXd df = arclength_derivative(c, f);
  MatrixX2d g(c.size(), 2);
  for (int i = 0; i < c.size(); ++i) g.row(i) = df[i] * c.tangent().row(i);
  return g;
}

// div_dOmega theta = trace(grad_dOmega theta) = tau . (d theta / ds).
inline VectorXd surface_divergence(const Curve& c, const PerturbationField& theta) {
  VectorXd out(c.size());
  for (int i = 0; i < c.size(); ++i) {
    const Vector2d dth = theta.dvalues().row(i).transpose() / c.speed()[i];
    out[i] = c.tau(i).dot(dth);
  }
  return out;
}

// d/dt of the pushed-forward outward normal at t = 0:
//   -(grad_dOmega theta) nu = -((d theta/ds) . nu) tau.
inline MatrixX2d dt_normal(const Curve& c, const PerturbationField& theta) {
  MatrixX2d out(c.size(), 2);
  for (int i = 0; i < c.size(); ++i) {
    const Vector2d dth = theta.dvalues().row(i).transpose() / c.speed()[i];
    out.row(i) = -(dth.dot(c.nu(i))) * c.tangent().row(i);
  }
  return out;
}

}  // namespace npshape
