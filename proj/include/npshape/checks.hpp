#pragma once

// Identity suites and residual checks built from the library primitives.
// These drive the `identities` and `convergence` CLI verbs and the
// acceptance run: each check returns a residual paired with the tolerance it
// is held to.

#include "npshape/extrapolation.hpp"
#include "npshape/geometry.hpp"
#include "npshape/layer.hpp"
#include "npshape/spectral.hpp"
#include "npshape/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace npshape {

struct IdentityResult {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

inline IdentityResult make_identity_result(std::string name, double residual,
                                           double tol) {
  return IdentityResult{std::move(name), residual, tol, residual <= tol};
}

// Smooth generic test density exp(cos t) sin(2t).
inline VectorXd generic_density(const Curve& c) {
  VectorXd psi(c.size());
  for (int i = 0; i < c.size(); ++i) {
    const double t = c.params()[i];
    psi[i] = std::exp(std::cos(t)) * std::sin(2.0 * t);
  }
  return psi;
}

inline std::vector<int> spread_nodes(const Curve& c, int count = 8) {
  std::vector<int> nodes(count);
  for (int k = 0; k < count; ++k) nodes[k] = k * c.size() / count;
  return nodes;
}

// Boundary-limit residuals of the double-layer jump D^± = ±psi/2 + K[psi],
// max over sides and sample nodes.
inline double jump_double_residual(const Curve& c, const DiscreteOperator& k,
                                   const VectorXd& psi, int upsample = 16) {
  const Curve fine = refine(c, upsample);
  const VectorXd psif = trig_interp_matrix(c.size(), fine.size()) * psi;
  const auto offsets = default_offsets(c);
  const VectorXd kpsi = k.apply(psi);
  auto field = [&](const Vector2d& x) {
    return eval_potential(fine, psif, x, PotentialKind::Double).value;
  };
  double worst = 0.0;
  for (int node : spread_nodes(c)) {
    const int fn = node * upsample;
    const double in = boundary_limit(fine, fn, Side::Interior, offsets, field).value;
    const double ex = boundary_limit(fine, fn, Side::Exterior, offsets, field).value;
    worst = std::max(worst, std::abs(in - (0.5 * psi[node] + kpsi[node])));
    worst = std::max(worst, std::abs(ex - (-0.5 * psi[node] + kpsi[node])));
  }
  return worst;
}

// Residuals of nu . grad S^± = ±psi/2 - K*[psi] via extrapolated normal
// derivatives of the single layer.
inline double jump_single_normal_residual(const Curve& c,
                                          const DiscreteOperator& kstar,
                                          const VectorXd& psi, int upsample = 16) {
  const Curve fine = refine(c, upsample);
  const VectorXd psif = trig_interp_matrix(c.size(), fine.size()) * psi;
  const auto offsets = default_offsets(c);
  const VectorXd kspsi = kstar.apply(psi);
  auto field = [&](const Vector2d& x) {
    return eval_potential(fine, psif, x, PotentialKind::Single).value;
  };
  double worst = 0.0;
  for (int node : spread_nodes(c)) {
    const int fn = node * upsample;
    const double in = boundary_limit(fine, fn, Side::Interior, offsets, field).slope;
    const double ex = boundary_limit(fine, fn, Side::Exterior, offsets, field).slope;
    worst = std::max(worst, std::abs(in - (0.5 * psi[node] - kspsi[node])));
    worst = std::max(worst, std::abs(ex - (-0.5 * psi[node] - kspsi[node])));
  }
  return worst;
}

// Gradient jump of the double layer: pv formula vs the extrapolated
// off-boundary gradient, both sides, both components.
inline double gradient_jump_residual(const Curve& c, const VectorXd& eta,
                                     int upsample = 16) {
  const Curve fine = refine(c, upsample);
  const VectorXd etaf = trig_interp_matrix(c.size(), fine.size()) * eta;
  const auto offsets = default_offsets(c);
  const MatrixX2d pin = pv_gradient_double_layer(c, eta, Side::Interior);
  const MatrixX2d pex = pv_gradient_double_layer(c, eta, Side::Exterior);
  double worst = 0.0;
  for (int node : spread_nodes(c)) {
    const int fn = node * upsample;
    for (int comp = 0; comp < 2; ++comp) {
      auto field = [&](const Vector2d& x) {
        return eval_potential_gradient(fine, etaf, x, PotentialKind::Double)
            .value[comp];
      };
      const double in = boundary_limit(fine, fn, Side::Interior, offsets, field).value;
      const double ex = boundary_limit(fine, fn, Side::Exterior, offsets, field).value;
      worst = std::max(worst, std::abs(in - pin(node, comp)));
      worst = std::max(worst, std::abs(ex - pex(node, comp)));
    }
  }
  return worst;
}

// Kellogg bound: distance of the computed spectrum outside [-1/2, 1/2].
inline double kellogg_excess(const Spectrum& sp) {
  return std::max(0.0, sp.values.cwiseAbs().maxCoeff() - 0.5);
}

// max |integral mu dsigma| over L2(w)-normalized eigenfunctions with
// lambda != 1/2.
inline double mean_zero_residual(const Curve& c, const Spectrum& sp) {
  double worst = 0.0;
  for (int k = 0; k < sp.values.size(); ++k) {
    if (std::abs(sp.values[k] - 0.5) < 1e-6) continue;
    double acc = 0.0;
    for (int i = 0; i < c.size(); ++i) acc += c.weights()[i] * sp.vectors(i, k);
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

// sigma-S self-adjointness residual <K*f, g>_S - <f, K*g>_S on random unit
// densities, deterministic in the seed.
inline double sigma_s_selfadjoint_residual(const Curve& c,
                                           const BoundaryOperators& ops,
                                           int trials = 8, unsigned seed = 2024) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const MatrixXd ws = c.weights().matrix().asDiagonal() * ops.S.matrix;
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    VectorXd f(c.size()), g(c.size());
    for (int i = 0; i < c.size(); ++i) {
      f[i] = gauss(rng);
      g[i] = gauss(rng);
    }
    f /= f.norm();
    g /= g.norm();
    const double lhs = (ops.Kstar.apply(f)).dot(ws * g);
    const double rhs = f.dot(ws * ops.Kstar.apply(g));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

// Closed-form nonzero NP eigenvalues of the ellipse: {1/2} and ±q^k/2 with
// q = (a-b)/(a+b), from separation of variables in elliptic coordinates.
inline std::vector<double> ellipse_np_eigenvalues(double a, double b, int kmax) {
  const double q = (a - b) / (a + b);
  std::vector<double> out = {0.5};
  for (int k = 1; k <= kmax; ++k) {
    const double v = 0.5 * std::pow(q, k);
    out.push_back(v);
    out.push_back(-v);
  }
  return out;
}

// max over the oracle values of the distance to the nearest computed
// eigenvalue.
inline double spectrum_match_error(const Spectrum& sp,
                                   const std::vector<double>& oracle) {
  double worst = 0.0;
  for (double target : oracle) {
    double best = 1e300;
    for (int i = 0; i < sp.values.size(); ++i)
      best = std::min(best, std::abs(sp.values[i] - target));
    worst = std::max(worst, best);
  }
  return worst;
}

inline bool identity_selected(const std::string& only, const std::string& name) {
  return only.empty() || only == name;
}

// Identity suite on one curve. `only` filters by name.
inline std::vector<IdentityResult> run_curve_identities(const Curve& c,
                                                        const std::string& only) {
  std::vector<IdentityResult> out;
  const BoundaryOperators ops = assemble_boundary_operators(c);
  const VectorXd one = VectorXd::Ones(c.size());
  const VectorXd psi = generic_density(c);

  if (identity_selected(only, "k_one"))
    out.push_back(make_identity_result(
        "k_one", (ops.K.apply(one).array() - 0.5).abs().maxCoeff(), 1e-10));
  if (identity_selected(only, "calderon"))
    out.push_back(make_identity_result(
        "calderon",
        (ops.K.matrix * ops.S.matrix - ops.S.matrix * ops.Kstar.matrix)
            .cwiseAbs()
            .maxCoeff(),
        1e-8));
  if (identity_selected(only, "sigma_s_selfadjoint"))
    out.push_back(make_identity_result(
        "sigma_s_selfadjoint", sigma_s_selfadjoint_residual(c, ops), 1e-10));
  if (identity_selected(only, "t_one"))
    out.push_back(make_identity_result(
        "t_one", ops.T.apply(one).cwiseAbs().maxCoeff(), 1e-8));
  if (identity_selected(only, "t_selfadjoint")) {
    const MatrixXd wt = c.weights().matrix().asDiagonal() * ops.T.matrix;
    out.push_back(make_identity_result(
        "t_selfadjoint", (wt - wt.transpose()).cwiseAbs().maxCoeff(), 1e-8));
  }
  const bool need_spectrum = identity_selected(only, "kellogg") ||
                             identity_selected(only, "mean_zero");
  if (need_spectrum) {
    const Spectrum sp = solve_spectrum(ops.Kstar);
    if (identity_selected(only, "kellogg"))
      out.push_back(make_identity_result("kellogg", kellogg_excess(sp), 1e-8));
    if (identity_selected(only, "mean_zero"))
      out.push_back(
          make_identity_result("mean_zero", mean_zero_residual(c, sp), 1e-9));
  }
  if (identity_selected(only, "jump_double"))
    out.push_back(make_identity_result(
        "jump_double", jump_double_residual(c, ops.K, psi), 1e-5));
  if (identity_selected(only, "jump_single_normal"))
    out.push_back(make_identity_result(
        "jump_single_normal", jump_single_normal_residual(c, ops.Kstar, psi), 1e-5));
  if (identity_selected(only, "gradient_jump"))
    out.push_back(make_identity_result(
        "gradient_jump", gradient_jump_residual(c, psi), 1e-5));
  return out;
}

// Sphere identity suite: Unsold family, Funk-Hecke, and the exact
// eigenvalue/multiplicity table, k = 0..kmax.
inline std::vector<IdentityResult> run_sphere_identities(int kmax, int n_theta,
                                                         int n_phi,
                                                         const std::string& only) {
  std::vector<IdentityResult> out;
  const SphereGrid grid = make_sphere_grid(n_theta, n_phi);
  double unsold = 0.0, nabla = 0.0, normal = 0.0, fh = 0.0, eig = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    const HarmonicBasis basis = evaluate_harmonics(grid, k);
    unsold = std::max(unsold, unsold_check(grid, basis));
    const GradientIdentityReport gi = gradient_identities(grid, basis);
    nabla = std::max(nabla, gi.nabla_deviation);
    normal = std::max(normal, gi.normal_deviation);
    const FunkHeckeReport fhr = funk_hecke_single_layer(k);
    fh = std::max(fh, fhr.single_layer_residual);
    eig = std::max(eig, fhr.eigenvalue_residual);
  }
  if (identity_selected(only, "unsold"))
    out.push_back(make_identity_result("unsold", unsold, 1e-10));
  if (identity_selected(only, "grad_sum"))
    out.push_back(make_identity_result("grad_sum", nabla, 1e-10));
  if (identity_selected(only, "normal_sum"))
    out.push_back(make_identity_result("normal_sum", normal, 1e-10));
  if (identity_selected(only, "funk_hecke"))
    out.push_back(make_identity_result("funk_hecke", fh, 1e-10));
  if (identity_selected(only, "kstar_eigen"))
    out.push_back(make_identity_result("kstar_eigen", eig, 1e-10));
  return out;
}

}  // namespace npshape
