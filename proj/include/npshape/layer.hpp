#pragma once

// Nystrom discretizations of the Laplace layer operators S, K, K*, T on a
// closed smooth curve, plus off-boundary potential evaluation and the
// principal value gradient of the double layer.
//
// Fundamental solution: E(z) = -(1/2pi) log|z|, so
//   grad E(z)   = -(1/2pi) z / |z|^2
//   hess E(z) v = -(1/2pi) (v / |z|^2 - 2 z (z.v) / |z|^4).
//
// K uses the plain trapezoidal rule (its kernel is smooth on smooth curves,
// diagonal limit kappa/(4pi)); S uses the Kussmaul-Martensen log splitting;
// K* is the weighted adjoint of K; T comes from the Maue identity
// T[psi] = -d/ds S[d psi/ds].

#include "npshape/fourier.hpp"
#include "npshape/geometry.hpp"
#include "npshape/parallel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace npshape {

enum class OperatorKind { S, K, Kstar, T };

inline Vector2d grad_E(const Vector2d& z) {
  const double r2 = z.squaredNorm();
  return -(1.0 / (2.0 * pi)) * z / r2;
}

inline Vector2d hess_E_times(const Vector2d& z, const Vector2d& v) {
  const double r2 = z.squaredNorm();
  return -(1.0 / (2.0 * pi)) * (v / r2 - 2.0 * z * (z.dot(v)) / (r2 * r2));
}

// Dense Nystrom matrix together with the quadrature weights of its host grid.
struct DiscreteOperator {
  MatrixXd matrix;
  ArrayXd weights;
  OperatorKind kind;

  VectorXd apply(const VectorXd& psi) const { return matrix * psi; }
  int size() const { return static_cast<int>(matrix.rows()); }
};

inline DiscreteOperator assemble_K(const Curve& c) {
  const int n = c.size();
  MatrixXd a(n, n);
  parallel_for(n, [&](int i) {
    const Vector2d xi = c.node(i);
    for (int j = 0; j < n; ++j) {
      if (j == i) {
        a(i, i) = c.curvature()[i] / (4.0 * pi) * c.weights()[i];
        continue;
      }
      const Vector2d z = xi - c.node(j);
      a(i, j) = c.nu(j).dot(grad_E(z)) * c.weights()[j];
    }
  });
  return DiscreteOperator{std::move(a), c.weights(), OperatorKind::K};
}

// K* as the weighted adjoint of K: A = W^{-1} A_K^T W. This coincides with
// the direct Nystrom discretization of the K* kernel, including the diagonal.
inline DiscreteOperator assemble_Kstar(const Curve& c) {
  DiscreteOperator k = assemble_K(c);
  const int n = c.size();
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a(i, j) = k.matrix(j, i) * c.weights()[j] / c.weights()[i];
  return DiscreteOperator{std::move(a), c.weights(), OperatorKind::Kstar};
}

inline DiscreteOperator assemble_S(const Curve& c) {
  const int n = c.size();
  const MatrixXd r = kress_log_weights(n);
  MatrixXd a(n, n);
  parallel_for(n, [&](int i) {
    const Vector2d xi = c.node(i);
    for (int j = 0; j < n; ++j) {
      double smooth;  // log( |x_i-x_j|^2 / (4 sin^2((t_i-t_j)/2)) )
      if (j == i) {
        smooth = 2.0 * std::log(c.speed()[i]);
      } else {
        const double d2 = (xi - c.node(j)).squaredNorm();
        const double s = 2.0 * std::sin(0.5 * (c.params()[i] - c.params()[j]));
        smooth = std::log(d2 / (s * s));
      }
      a(i, j) = (-r(i, j) / (4.0 * pi) - smooth / (2.0 * n)) * c.speed()[j];
    }
  });
  return DiscreteOperator{std::move(a), c.weights(), OperatorKind::S};
}

inline DiscreteOperator assemble_T(const Curve& c) {
  const DiscreteOperator s = assemble_S(c);
  const int n = c.size();
  MatrixXd ds = trig_diff_matrix(n);
  for (int i = 0; i < n; ++i) ds.row(i) /= c.speed()[i];
  MatrixXd a = -(ds * s.matrix * ds);
  return DiscreteOperator{std::move(a), c.weights(), OperatorKind::T};
}

struct BoundaryOperators {
  DiscreteOperator S, K, Kstar, T;
};

inline BoundaryOperators assemble_boundary_operators(const Curve& c) {
  return BoundaryOperators{assemble_S(c), assemble_K(c), assemble_Kstar(c),
                           assemble_T(c)};
}

enum class PotentialKind { Single, Double };

template <class T>
struct NearBoundary {
  T value;
  bool near_boundary;  // set when the target is within one node spacing
};

namespace detail {

inline bool near_flag(const Curve& c, const Vector2d& x) {
  const int n = c.size();
  int jmin = 0;
  double dmin = (x - c.node(0)).norm();
  for (int j = 1; j < n; ++j) {
    const double d = (x - c.node(j)).norm();
    if (d < dmin) {
      dmin = d;
      jmin = j;
    }
  }
  const double spacing = (c.node((jmin + 1) % n) - c.node(jmin)).norm();
  return dmin < spacing;
}

}  // namespace detail

// Plain trapezoidal evaluation off the boundary; accuracy degrades near it
// (flagged), by design no near-singular machinery.
inline NearBoundary<double> eval_potential(const Curve& c, const VectorXd& psi,
                                           const Vector2d& x, PotentialKind which) {
  if (psi.size() != c.size())
    throw std::invalid_argument("eval_potential: density size mismatch");
  double v = 0.0;
  for (int j = 0; j < c.size(); ++j) {
    const Vector2d z = x - c.node(j);
    if (which == PotentialKind::Single)
      v += -(1.0 / (2.0 * pi)) * std::log(z.norm()) * psi[j] * c.weights()[j];
    else
      v += c.nu(j).dot(grad_E(z)) * psi[j] * c.weights()[j];
  }
  return {v, detail::near_flag(c, x)};
}

inline NearBoundary<Vector2d> eval_potential_gradient(const Curve& c,
                                                      const VectorXd& psi,
                                                      const Vector2d& x,
                                                      PotentialKind which) {
  if (psi.size() != c.size())
    throw std::invalid_argument("eval_potential_gradient: density size mismatch");
  Vector2d v = Vector2d::Zero();
  for (int j = 0; j < c.size(); ++j) {
    const Vector2d z = x - c.node(j);
    if (which == PotentialKind::Single)
      v += grad_E(z) * psi[j] * c.weights()[j];
    else
      v += hess_E_times(z, c.nu(j)) * psi[j] * c.weights()[j];
  }
  return {v, detail::near_flag(c, x)};
}

// Boundary trace of grad S^(side)[psi]: tangential part has no jump,
// normal part is +-psi/2 - K*[psi].
inline MatrixX2d grad_single_layer_boundary(const Curve& c, const DiscreteOperator& s,
                                            const DiscreteOperator& kstar,
                                            const VectorXd& psi, Side side) {
  const VectorXd trace = s.apply(psi);
  const VectorXd dtrace = arclength_derivative(c, trace);
  const VectorXd nu_part =
      (side == Side::Interior ? 0.5 : -0.5) * psi - kstar.apply(psi);
  MatrixX2d g(c.size(), 2);
  for (int i = 0; i < c.size(); ++i)
    g.row(i) = dtrace[i] * c.tangent().row(i) + nu_part[i] * c.normal().row(i);
  return g;
}

// Boundary limit of grad D^(side)[eta] via the gradient jump formula:
//   grad D^(+-)[eta](x) = +-(1/2) grad_dOmega eta(x)
//                        + pv int (eta(y)-eta(x)) hess E(x-y) nu(y) dsigma_y.
// The principal value integral uses the parity trapezoidal rule (symmetric
// exclusion of the same-parity nodes around the singularity), which is
// spectrally accurate for these simple-pole integrands.
inline MatrixX2d pv_gradient_double_layer(const Curve& c, const VectorXd& eta,
                                          Side side) {
  if (eta.size() != c.size())
    throw std::invalid_argument("pv_gradient_double_layer: density size mismatch");
  const int n = c.size();
  const double w = pv_parity_weight(n);
  const MatrixX2d teta = tangential_gradient(c, eta);
  MatrixX2d out(n, 2);
  const double sgn = (side == Side::Interior) ? 0.5 : -0.5;
  parallel_for(n, [&](int i) {
    const Vector2d xi = c.node(i);
    Vector2d acc = Vector2d::Zero();
    for (int j = (i + 1) % 2; j < n; j += 2) {
      const Vector2d z = xi - c.node(j);
      acc += (eta[j] - eta[i]) * hess_E_times(z, c.nu(j)) * c.speed()[j];
    }
    out.row(i) = sgn * teta.row(i) + (w * acc).transpose();
  });
  return out;
}

// pv int psi(y) grad E(x-y) dsigma_y at the nodes, evaluated through the
// single-layer jump relations (average of the two one-sided gradients):
// tangential part grad_dOmega S[psi], normal part -K*[psi].
inline MatrixX2d pv_grad_E_integral(const Curve& c, const DiscreteOperator& s,
                                    const DiscreteOperator& kstar,
                                    const VectorXd& psi) {
  const VectorXd dtrace = arclength_derivative(c, s.apply(psi));
  const VectorXd nu_part = -kstar.apply(psi);
  MatrixX2d g(c.size(), 2);
  for (int i = 0; i < c.size(); ++i)
    g.row(i) = dtrace[i] * c.tangent().row(i) + nu_part[i] * c.normal().row(i);
  return g;
}

}  // namespace npshape
