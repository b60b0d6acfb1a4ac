#pragma once

// NP spectrum of the discretized K*, eigenvalue clusters with sigma-S
// orthonormal bases, Riesz spectral projectors, and the plasmonic
// transmission-problem correspondence.

#include "npshape/extrapolation.hpp"
#include "npshape/geometry.hpp"
#include "npshape/layer.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace npshape {

// Full dense eigen-decomposition of A_{K*}. Eigenvalues are the real parts
// sorted descending; entries whose imaginary part exceeds 1e-8 are flagged as
// discretization artifacts. Eigenvectors are L2(w)-normalized with the
// largest-magnitude entry made positive.
struct Spectrum {
  VectorXd values;                  // descending
  MatrixXd vectors;                 // column j pairs with values[j]
  double max_imag = 0.0;
  std::vector<int> complex_flagged;  // indices into `values`
};

inline Spectrum solve_spectrum(const DiscreteOperator& kstar) {
  Eigen::EigenSolver<MatrixXd> es(kstar.matrix);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("solve_spectrum: eigensolver failed to converge");
  const int n = kstar.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return ev[a].real() > ev[b].real();
  });

  Spectrum out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    const int j = order[k];
    out.values[k] = ev[j].real();
    out.max_imag = std::max(out.max_imag, std::abs(ev[j].imag()));
    if (std::abs(ev[j].imag()) > 1e-8) out.complex_flagged.push_back(k);

    VectorXd v = es.eigenvectors().col(j).real();
    if (v.norm() < 1e-12) v = es.eigenvectors().col(j).imag();
    double nrm2 = 0.0;
    for (int i = 0; i < n; ++i) nrm2 += kstar.weights[i] * v[i] * v[i];
    v /= std::sqrt(nrm2);
    int imax = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    if (v[imax] < 0.0) v = -v;
    out.vectors.col(k) = v;
  }
  return out;
}

// An isolated eigenvalue group {lambda_1 <= ... <= lambda_m} inside
// (lambda_bar - delta, lambda_bar + delta) with a basis of the spanned
// eigenspace, orthonormal in <f,g>_S = integral S[f] g dsigma.
struct EigenCluster {
  double lambda_bar = 0.0;
  double delta = 0.0;
  int m = 0;
  VectorXd lambdas;  // ascending
  MatrixXd basis;    // N x m
  bool sigma_s_orthonormal = true;
};

inline bool targets_one_half(double lambda) { return std::abs(lambda - 0.5) < 1e-9; }

inline EigenCluster extract_cluster(const Spectrum& spectrum, double lambda_target,
                                    double delta, const DiscreteOperator& s,
                                    const Curve& c) {
  if (!(delta > 0.0)) throw std::invalid_argument("extract_cluster: delta must be > 0");
  const double lo = lambda_target - delta, hi = lambda_target + delta;
  if (lo <= 0.0 && hi >= 0.0)
    throw std::invalid_argument(
        "extract_cluster: window contains 0 (accumulation point of the spectrum)");
  if (!targets_one_half(lambda_target) && lo <= 0.5 && hi >= 0.5)
    throw std::invalid_argument(
        "extract_cluster: window contains 1/2 but does not target it");

  std::vector<int> members;
  for (int k = 0; k < spectrum.values.size(); ++k)
    if (spectrum.values[k] > lo && spectrum.values[k] < hi) members.push_back(k);
  if (members.empty())
    throw std::invalid_argument("extract_cluster: no eigenvalue inside the window");

  // The rest of the spectrum must stay clear of the window: outside
  // eigenvalues within delta/10 of the window edge, or within the cluster
  // tolerance 1e-7 of a member (a roundoff-degenerate group cut in half),
  // violate isolation.
  for (int k = 0; k < spectrum.values.size(); ++k) {
    const double v = spectrum.values[k];
    if (v > lo && v < hi) continue;
    bool violated = std::min(std::abs(v - lo), std::abs(v - hi)) < delta / 10.0;
    for (int j : members)
      violated = violated || std::abs(v - spectrum.values[j]) < 1e-7;
    if (violated)
      throw std::invalid_argument(
          "extract_cluster: isolation violated by eigenvalue " + std::to_string(v));
  }

  const int m = static_cast<int>(members.size());
  EigenCluster out;
  out.lambda_bar = lambda_target;
  out.delta = delta;
  out.m = m;
  out.lambdas.resize(m);
  out.basis.resize(spectrum.vectors.rows(), m);
  // ascending within the cluster
  std::sort(members.begin(), members.end(), [&](int a, int b) {
    return spectrum.values[a] < spectrum.values[b];
  });
  for (int j = 0; j < m; ++j) {
    out.lambdas[j] = spectrum.values[members[j]];
    out.basis.col(j) = spectrum.vectors.col(members[j]);
  }

  // Gram-Schmidt in the sigma-S product via Cholesky of the Gram matrix.
  const MatrixXd ws = c.weights().matrix().asDiagonal() * s.matrix;
  const MatrixXd gram = out.basis.transpose() * ws * out.basis;
  Eigen::LLT<MatrixXd> llt(0.5 * (gram + gram.transpose()));
  if (llt.info() == Eigen::Success) {
    out.basis = out.basis * llt.matrixL().toDenseMatrix().inverse().transpose();
    out.sigma_s_orthonormal = true;
  } else if (targets_one_half(lambda_target)) {
    // The sigma-S form can be indefinite on non-mean-zero densities (it sees
    // the logarithmic capacity); fall back to L2(w) normalization.
    for (int j = 0; j < m; ++j) {
      double nrm2 = 0.0;
      for (int i = 0; i < c.size(); ++i)
        nrm2 += c.weights()[i] * out.basis(i, j) * out.basis(i, j);
      out.basis.col(j) /= std::sqrt(nrm2);
    }
    out.sigma_s_orthonormal = false;
  } else {
    throw std::runtime_error("extract_cluster: sigma-S Gram matrix not positive");
  }
  return out;
}

// Riesz projector for a circular contour, trapezoidal in the contour angle:
//   P = -(1/2 pi i) sum_k (A - xi_k)^{-1} xi'_k (2 pi / M).
struct RieszProjector {
  MatrixXd matrix;
  double center = 0.0;
  double radius = 0.0;
  int contour_points = 0;
  int rank = 0;
  double max_imag = 0.0;
};

inline RieszProjector riesz_projector(const DiscreteOperator& kstar, double center,
                                      double radius, int contour_points,
                                      const Spectrum* spectrum = nullptr) {
  if (!(radius > 0.0) || contour_points < 4)
    throw std::invalid_argument("riesz_projector: bad contour parameters");
  if (spectrum) {
    for (int k = 0; k < spectrum->values.size(); ++k) {
      const double dist = std::abs(std::abs(spectrum->values[k] - center) - radius);
      if (dist < radius / 10.0)
        throw std::runtime_error(
            "riesz_projector: contour too close to eigenvalue " +
            std::to_string(spectrum->values[k]) + " (margin < radius/10)");
    }
  }
  const int n = kstar.size();
  using MatrixXcd = Eigen::MatrixXcd;
  const std::complex<double> i1(0.0, 1.0);
  MatrixXcd acc = MatrixXcd::Zero(n, n);
  const MatrixXcd a = kstar.matrix.cast<std::complex<double>>();
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  for (int k = 0; k < contour_points; ++k) {
    const double sk = 2.0 * pi * k / contour_points;
    const std::complex<double> eis = std::exp(i1 * sk);
    const std::complex<double> xik = center + radius * eis;
    Eigen::PartialPivLU<MatrixXcd> lu(a - xik * id);
    acc += eis * lu.solve(id);
  }
  acc *= -(radius / contour_points);

  RieszProjector out;
  out.matrix = acc.real();
  out.max_imag = acc.imag().cwiseAbs().maxCoeff();
  out.center = center;
  out.radius = radius;
  out.contour_points = contour_points;
  Eigen::BDCSVD<MatrixXd> svd(out.matrix);
  out.rank = 0;
  for (int k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()[k] > 0.5) ++out.rank;
  return out;
}

// Plasmonic eigenvalue epsilon = (1/2 + lambda)/(1/2 - lambda).
inline double plasmonic_eps(double lambda) {
  if (std::abs(0.5 - lambda) < 1e-12)
    throw std::domain_error("plasmonic_eps: lambda = 1/2");
  return (0.5 + lambda) / (0.5 - lambda);
}

// Checks the transmission conditions of the plasmonic problem for
// u = S^+[mu], v = S^-[mu]: u - v = 0 and eps d_nu u + d_nu v = 0 on the
// boundary, with traces and normal derivatives recovered by off-boundary
// evaluation and extrapolation (independent of the boundary operators).
struct PlasmonicReport {
  double eps = 0.0;
  double max_trace_residual = 0.0;
  double max_flux_residual = 0.0;
};

// The off-boundary quadrature runs on a trigonometrically upsampled copy of
// the curve and density (still plain trapezoid), which keeps the quadrature
// error negligible at extrapolation offsets of a few coarse spacings.
inline PlasmonicReport verify_plasmonic(const Curve& c, const EigenCluster& cluster,
                                        const std::vector<int>& sample_nodes,
                                        const std::vector<double>& offsets,
                                        int upsample = 16) {
  if (targets_one_half(cluster.lambda_bar))
    throw std::domain_error("verify_plasmonic: lambda = 1/2 excluded");
  PlasmonicReport report;
  report.eps = plasmonic_eps(cluster.lambda_bar);
  const Curve fine = refine(c, upsample);
  const MatrixXd interp = trig_interp_matrix(c.size(), fine.size());
  for (int j = 0; j < cluster.m; ++j) {
    const VectorXd mu = interp * cluster.basis.col(j);
    auto field = [&](const Vector2d& x) {
      return eval_potential(fine, mu, x, PotentialKind::Single).value;
    };
    for (int node : sample_nodes) {
      const int fnode = node * upsample;
      const ValueSlope in = boundary_limit(fine, fnode, Side::Interior, offsets, field);
      const ValueSlope ex = boundary_limit(fine, fnode, Side::Exterior, offsets, field);
      report.max_trace_residual =
          std::max(report.max_trace_residual, std::abs(in.value - ex.value));
      report.max_flux_residual = std::max(
          report.max_flux_residual, std::abs(report.eps * in.slope + ex.slope));
    }
  }
  return report;
}

}  // namespace npshape
