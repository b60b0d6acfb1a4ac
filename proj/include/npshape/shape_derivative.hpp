#pragma once

// First-order shape sensitivity of the NP spectrum: the derivative of the
// pulled-back double-layer operator, the cluster derivative matrix whose
// trace gives d Lambda_h and whose eigenvalues are the one-sided branch
// derivatives, the Rellich-Pohozaev eigenvalue recovery, and the
// finite-difference oracles each formula is checked against.

#include "npshape/extrapolation.hpp"
#include "npshape/geometry.hpp"
#include "npshape/layer.hpp"
#include "npshape/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace npshape {

// Elementary symmetric polynomial Lambda_h^m(xi_1..xi_m), product-expansion
// recurrence.
inline double symmetric_function(int h, const VectorXd& values) {
  const int m = static_cast<int>(values.size());
  if (h < 1 || h > m)
    throw std::invalid_argument("symmetric_function: h out of range");
  VectorXd e = VectorXd::Zero(h + 1);
  e[0] = 1.0;
  for (int k = 0; k < m; ++k)
    for (int j = std::min(h, k + 1); j >= 1; --j) e[j] += values[k] * e[j - 1];
  return e[h];
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r *= double(n - k + j) / j;
  return r;
}

// The four terms of d/dt K_{I+t theta}[eta] |_{t=0}:
//   pv          pv int (theta.nu)(y) grad_dOmega eta(y) . grad E(x-y) dsigma_y
//   t_term      (theta.nu)(x) T[eta](x)
//   transport   theta(x) . grad_dOmega K[eta](x)
//   commutator  -K[theta . grad_dOmega eta](x)
struct DKTerms {
  VectorXd pv, t_term, transport, commutator;
  VectorXd total() const { return pv + t_term + transport + commutator; }
};

inline DKTerms dK_operator_terms(const Curve& c, const BoundaryOperators& ops,
                                 const PerturbationField& theta,
                                 const VectorXd& eta) {
  const int n = c.size();
  if (eta.size() != n || theta.size() != n)
    throw std::invalid_argument("dK_operator: size mismatch");
  const VectorXd thetanu = theta.normal_component(c);
  const MatrixX2d geta = tangential_gradient(c, eta);

  DKTerms out;
  out.pv.resize(n);
  const double w = pv_parity_weight(n);
  for (int i = 0; i < n; ++i) {
    const Vector2d xi = c.node(i);
    double acc = 0.0;
    for (int j = (i + 1) % 2; j < n; j += 2) {
      const Vector2d ge = grad_E(Vector2d(xi - c.node(j)));
      acc += thetanu[j] * (geta(j, 0) * ge[0] + geta(j, 1) * ge[1]) * c.speed()[j];
    }
    out.pv[i] = w * acc;
  }

  out.t_term = thetanu.cwiseProduct(ops.T.apply(eta));

  const MatrixX2d gK = tangential_gradient(c, ops.K.apply(eta));
  out.transport.resize(n);
  VectorXd theta_dot_geta(n);
  for (int i = 0; i < n; ++i) {
    out.transport[i] = theta.values().row(i).dot(gK.row(i));
    theta_dot_geta[i] = theta.values().row(i).dot(geta.row(i));
  }
  out.commutator = -ops.K.apply(theta_dot_geta);
  return out;
}

inline VectorXd dK_operator(const Curve& c, const BoundaryOperators& ops,
                            const PerturbationField& theta, const VectorXd& eta) {
  return dK_operator_terms(c, ops, theta, eta).total();
}

// m x m derivative matrix of the cluster at lambda (lambda != 0, 1/2):
//   dA_ij = int (theta.nu) ( -grad_dOmega u_i . grad_dOmega u_j
//                            + (1/2+lambda)/(1/2-lambda) d_nu u_i d_nu u_j ) dsigma
// with u_i = S^+[mu_i] evaluated through boundary data only. The normal
// derivative is taken from the jump formula d_nu u = mu/2 - K*[mu]; the
// eigenfunction shortcut (1/2 - lambda) mu is kept as a cross-check.
struct ClusterDerivative {
  MatrixXd dA;
  double lambda = 0.0;
  int m = 0;
  std::string theta_descriptor;
  double normal_route_difference = 0.0;  // jump formula vs (1/2-lambda) mu
  double gram_drift = 0.0;               // sigma-S Gram deviation before rescale
};

inline ClusterDerivative cluster_derivative_matrix(const Curve& c,
                                                   const BoundaryOperators& ops,
                                                   const EigenCluster& cluster,
                                                   const PerturbationField& theta) {
  ClusterDerivative out;
  out.lambda = cluster.lambda_bar;
  out.m = cluster.m;
  out.theta_descriptor = theta.descriptor();
  if (targets_one_half(cluster.lambda_bar)) {
    // 1/2 is a simple eigenvalue on every domain; its shape derivative is 0.
    out.dA = MatrixXd::Zero(cluster.m, cluster.m);
    return out;
  }
  if (std::abs(cluster.lambda_bar) < 1e-12)
    throw std::invalid_argument("cluster_derivative_matrix: lambda = 0 excluded");
  if (!cluster.sigma_s_orthonormal)
    throw std::invalid_argument(
        "cluster_derivative_matrix: basis is not sigma-S orthonormal");

  const int n = c.size();
  const int m = cluster.m;
  MatrixXd basis = cluster.basis;
  const MatrixXd ws = c.weights().matrix().asDiagonal() * ops.S.matrix;
  const MatrixXd gram = basis.transpose() * ws * basis;
  out.gram_drift = (gram - MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  if (out.gram_drift > 1e-10) {
    Eigen::LLT<MatrixXd> llt(0.5 * (gram + gram.transpose()));
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("cluster_derivative_matrix: Gram matrix not positive");
    basis = basis * llt.matrixL().toDenseMatrix().inverse().transpose();
  }

  const double lambda = cluster.lambda_bar;
  const double eps = plasmonic_eps(lambda);
  const VectorXd thetanu = theta.normal_component(c);

  std::vector<MatrixX2d> tgrad(m);
  MatrixXd dnu(n, m);
  for (int j = 0; j < m; ++j) {
    const VectorXd mu = basis.col(j);
    tgrad[j] = tangential_gradient(c, ops.S.apply(mu));
    dnu.col(j) = 0.5 * mu - ops.Kstar.apply(mu);
    out.normal_route_difference =
        std::max(out.normal_route_difference,
                 (dnu.col(j) - (0.5 - lambda) * mu).cwiseAbs().maxCoeff());
  }

  out.dA.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        const double gdot = tgrad[i].row(k).dot(tgrad[j].row(k));
        acc += c.weights()[k] * thetanu[k] *
               (-gdot + eps * dnu(k, i) * dnu(k, j));
      }
      out.dA(i, j) = acc;
    }
  }
  return out;
}

// d/dt Lambda_h^m = lambda^(h-1) binom(m-1, h-1) trace(dA).
inline double dLambda(const ClusterDerivative& cd, int h) {
  if (h < 1 || h > cd.m) throw std::invalid_argument("dLambda: h out of range");
  return std::pow(cd.lambda, h - 1) * binomial(cd.m - 1, h - 1) * cd.dA.trace();
}

// Eigenvalues of the symmetrized dA, ascending: the one-sided derivatives of
// the sorted eigenvalue branches.
inline VectorXd branch_derivatives(const ClusterDerivative& cd) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (cd.dA + cd.dA.transpose()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("branch_derivatives: eigensolver failed");
  return es.eigenvalues();
}

// ---------------------------------------------------------------------------
// Finite-difference oracles. Every perturbed solve re-assembles the operator
// on perturb(c, theta, t) over the same parameter grid, which is exactly the
// pulled-back operator family the formulas differentiate.

inline std::vector<double> default_fd_steps() { return {1e-3, 5e-4, 2.5e-4}; }

// Central finite difference of K_{I+t theta}[eta] with Richardson
// extrapolation in t^2, per node.
inline VectorXd fd_dK(const Curve& c, const PerturbationField& theta,
                      const VectorXd& eta, const std::vector<double>& steps) {
  const int n = c.size();
  MatrixXd quotients(n, steps.size());
  for (size_t k = 0; k < steps.size(); ++k) {
    const double t = steps[k];
    const VectorXd plus = assemble_K(perturb(c, theta, t)).apply(eta);
    const VectorXd minus = assemble_K(perturb(c, theta, -t)).apply(eta);
    quotients.col(k) = (plus - minus) / (2.0 * t);
  }
  std::vector<double> xs(steps.size());
  for (size_t k = 0; k < steps.size(); ++k) xs[k] = steps[k] * steps[k];
  VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> ys(steps.size());
    for (size_t k = 0; k < steps.size(); ++k) ys[k] = quotients(i, k);
    out[i] = poly_fit_at_zero(xs, ys).value;
  }
  return out;
}

// Eigenvalues of the pulled-back K* on perturb(c, theta, t) nearest the
// cluster, ascending.
inline VectorXd fd_cluster_lambdas(const Curve& c, const PerturbationField& theta,
                                   const EigenCluster& cluster, double t) {
  const Curve ct = perturb(c, theta, t);
  const Spectrum sp = solve_spectrum(assemble_Kstar(ct));
  std::vector<int> order(sp.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(sp.values[a] - cluster.lambda_bar) <
           std::abs(sp.values[b] - cluster.lambda_bar);
  });
  VectorXd out(cluster.m);
  for (int j = 0; j < cluster.m; ++j) out[j] = sp.values[order[j]];
  std::sort(out.data(), out.data() + cluster.m);
  return out;
}

// Formula value vs finite-difference oracle for one scalar quantity.
struct DerivativeReport {
  std::string quantity;
  std::string theta_descriptor;
  std::vector<double> steps;
  std::vector<double> fd_quotients;
  double fd_extrapolated = 0.0;
  double formula = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
};

inline DerivativeReport make_report(std::string quantity, std::string theta,
                                    std::vector<double> steps,
                                    std::vector<double> quotients, int fd_order,
                                    double formula) {
  DerivativeReport r;
  r.quantity = std::move(quantity);
  r.theta_descriptor = std::move(theta);
  r.steps = std::move(steps);
  r.fd_quotients = std::move(quotients);
  r.fd_extrapolated = richardson(r.steps, r.fd_quotients, fd_order);
  r.formula = formula;
  r.abs_error = std::abs(r.formula - r.fd_extrapolated);
  const double scale = std::max(std::abs(r.fd_extrapolated), std::abs(r.formula));
  r.rel_error = (scale > 0.0) ? r.abs_error / scale : r.abs_error;
  return r;
}

// Sup-norm comparison of dK_operator against the central FD of the
// re-assembled pulled-back K.
inline DerivativeReport check_dK(const Curve& c, const BoundaryOperators& ops,
                                 const PerturbationField& theta, const VectorXd& eta,
                                 const std::vector<double>& steps) {
  const VectorXd formula = dK_operator(c, ops, theta, eta);
  const VectorXd fd = fd_dK(c, theta, eta, steps);
  DerivativeReport r;
  r.quantity = "dK[eta] (sup norm)";
  r.theta_descriptor = theta.descriptor();
  r.steps = steps;
  r.fd_extrapolated = fd.cwiseAbs().maxCoeff();
  r.formula = formula.cwiseAbs().maxCoeff();
  r.abs_error = (formula - fd).cwiseAbs().maxCoeff();
  r.rel_error = r.abs_error / std::max(fd.cwiseAbs().maxCoeff(), 1e-300);
  return r;
}

// d/dt Lambda_h of the cluster eigenvalues vs central FD of the symmetric
// function of the re-solved spectrum.
inline DerivativeReport check_dLambda(const Curve& c, const BoundaryOperators& ops,
                                      const EigenCluster& cluster,
                                      const PerturbationField& theta, int h,
                                      const std::vector<double>& steps) {
  const ClusterDerivative cd = cluster_derivative_matrix(c, ops, cluster, theta);
  std::vector<double> quotients(steps.size());
  for (size_t k = 0; k < steps.size(); ++k) {
    const double t = steps[k];
    const double plus = symmetric_function(h, fd_cluster_lambdas(c, theta, cluster, t));
    const double minus =
        symmetric_function(h, fd_cluster_lambdas(c, theta, cluster, -t));
    quotients[k] = (plus - minus) / (2.0 * t);
  }
  return make_report("dLambda[h=" + std::to_string(h) + "]", theta.descriptor(),
                     steps, quotients, 2, dLambda(cd, h));
}

// Sorted branch derivatives vs one-sided FD of the sorted cluster
// eigenvalues (Richardson in t).
inline std::vector<DerivativeReport> check_branch_derivatives(
    const Curve& c, const BoundaryOperators& ops, const EigenCluster& cluster,
    const PerturbationField& theta, const std::vector<double>& steps) {
  const ClusterDerivative cd = cluster_derivative_matrix(c, ops, cluster, theta);
  const VectorXd formula = branch_derivatives(cd);
  MatrixXd quotients(cluster.m, steps.size());
  for (size_t k = 0; k < steps.size(); ++k) {
    const VectorXd lam_t = fd_cluster_lambdas(c, theta, cluster, steps[k]);
    quotients.col(k) = (lam_t - cluster.lambdas) / steps[k];
  }
  std::vector<DerivativeReport> out;
  for (int j = 0; j < cluster.m; ++j) {
    std::vector<double> q(steps.size());
    for (size_t k = 0; k < steps.size(); ++k) q[k] = quotients(j, k);
    out.push_back(make_report("branch[" + std::to_string(j) + "]",
                              theta.descriptor(), steps, q, 1, formula[j]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rellich-Pohozaev identities.

// lambda = (1/2) int (x.nu)(|grad_dOmega u|^2 - (d_nu u)^2)
//              / int (x.nu) |grad u|^2, one value per basis function.
// Requires a star-shaped curve (x.nu > 0 at all nodes) and lambda != 1/2.
inline VectorXd pohozaev_lambda(const Curve& c, const BoundaryOperators& ops,
                                const EigenCluster& cluster) {
  if (targets_one_half(cluster.lambda_bar))
    throw std::domain_error("pohozaev_lambda: lambda = 1/2 excluded");
  const int n = c.size();
  VectorXd xnu(n);
  for (int i = 0; i < n; ++i) {
    xnu[i] = c.node(i).dot(c.nu(i));
    if (!(xnu[i] > 0.0))
      throw std::domain_error("pohozaev_lambda: curve is not star-shaped w.r.t. 0");
  }
  VectorXd out(cluster.m);
  for (int j = 0; j < cluster.m; ++j) {
    const VectorXd mu = cluster.basis.col(j);
    const MatrixX2d g = tangential_gradient(c, ops.S.apply(mu));
    const VectorXd dnu = 0.5 * mu - ops.Kstar.apply(mu);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g2 = g.row(i).squaredNorm();
      num += c.weights()[i] * xnu[i] * (g2 - dnu[i] * dnu[i]);
      den += c.weights()[i] * xnu[i] * (g2 + dnu[i] * dnu[i]);
    }
    if (std::abs(den) < 1e-12)
      throw std::domain_error("pohozaev_lambda: vanishing denominator");
    out[j] = 0.5 * num / den;
  }
  return out;
}

// Residual of the null identity int a (-|grad_dOmega u|^2 + eps (d_nu u)^2) = 0
// for a boundary weight a (x.nu for dilation, zeta.nu for translation,
// (Zx).nu for rotation). `scale` carries the absolute size of the integrand.
struct NullIdentityResidual {
  double residual = 0.0;
  double scale = 0.0;
};

inline NullIdentityResidual pohozaev_variant(const Curve& c,
                                             const BoundaryOperators& ops,
                                             const EigenCluster& cluster,
                                             const VectorXd& a) {
  if (targets_one_half(cluster.lambda_bar))
    throw std::domain_error("pohozaev_variant: lambda = 1/2 excluded");
  const double eps = plasmonic_eps(cluster.lambda_bar);
  NullIdentityResidual out;
  for (int j = 0; j < cluster.m; ++j) {
    const VectorXd mu = cluster.basis.col(j);
    const MatrixX2d g = tangential_gradient(c, ops.S.apply(mu));
    const VectorXd dnu = 0.5 * mu - ops.Kstar.apply(mu);
    double acc = 0.0, scale = 0.0;
    for (int i = 0; i < c.size(); ++i) {
      const double g2 = g.row(i).squaredNorm();
      acc += c.weights()[i] * a[i] * (-g2 + eps * dnu[i] * dnu[i]);
      scale += c.weights()[i] * std::abs(a[i]) * (g2 + eps * dnu[i] * dnu[i]);
    }
    out.residual = std::max(out.residual, std::abs(acc));
    out.scale = std::max(out.scale, scale);
  }
  return out;
}

// Cross-check of the adjoint switch
//   int S[mu_i] (d_phi K*[mu_j].theta) dsigma
//     = int (d_phi K[S[mu_i]].theta) mu_j dsigma,
// left side by FD of the pulled-back K*, right side by dK_operator.
struct SwitcherooReport {
  MatrixXd left, right;
  double max_residual = 0.0;
};

inline SwitcherooReport switcheroo_check(const Curve& c, const BoundaryOperators& ops,
                                         const EigenCluster& cluster,
                                         const PerturbationField& theta,
                                         const std::vector<double>& steps) {
  const int n = c.size();
  const int m = cluster.m;
  std::vector<double> xs(steps.size());
  for (size_t k = 0; k < steps.size(); ++k) xs[k] = steps[k] * steps[k];

  // d_phi K*[mu_j].theta by central FD + Richardson, all columns at once
  std::vector<MatrixXd> quotients(steps.size(), MatrixXd(n, m));
  for (size_t k = 0; k < steps.size(); ++k) {
    const double t = steps[k];
    const MatrixXd plus = assemble_Kstar(perturb(c, theta, t)).matrix * cluster.basis;
    const MatrixXd minus = assemble_Kstar(perturb(c, theta, -t)).matrix * cluster.basis;
    quotients[k] = (plus - minus) / (2.0 * t);
  }
  MatrixXd dkstar(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      std::vector<double> ys(steps.size());
      for (size_t k = 0; k < steps.size(); ++k) ys[k] = quotients[k](i, j);
      dkstar(i, j) = poly_fit_at_zero(xs, ys).value;
    }
  }

  SwitcherooReport out;
  out.left.resize(m, m);
  out.right.resize(m, m);
  for (int i = 0; i < m; ++i) {
    const VectorXd smui = ops.S.apply(cluster.basis.col(i));
    const VectorXd dk = dK_operator(c, ops, theta, smui);
    for (int j = 0; j < m; ++j) {
      double left = 0.0, right = 0.0;
      for (int k = 0; k < n; ++k) {
        left += c.weights()[k] * smui[k] * dkstar(k, j);
        right += c.weights()[k] * dk[k] * cluster.basis(k, j);
      }
      out.left(i, j) = left;
      out.right(i, j) = right;
      out.max_residual = std::max(out.max_residual, std::abs(left - right));
    }
  }
  return out;
}

}  // namespace npshape
