#include "npshape/checks.hpp"
#include "npshape/shape_derivative.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace npshape;

namespace {

struct EllipseSetup {
  Curve curve = build_ellipse(1.0, 0.5, 256);
  BoundaryOperators ops = assemble_boundary_operators(curve);
  Spectrum spectrum = solve_spectrum(ops.Kstar);
  EigenCluster cluster = extract_cluster(spectrum, 1.0 / 6.0, 0.05, ops.S, curve);
  PerturbationField theta = PerturbationField::from_function(
      curve,
      [](double t, const Vector2d&) {
        return Vector2d(std::cos(2 * t), std::sin(3 * t));
      },
      "fourier:2,3");
};

EllipseSetup& ellipse_setup() {
  static EllipseSetup s;
  return s;
}

struct StarSetup {
  Curve curve = build_star(1.0, {{4, 0.2}}, 256);
  BoundaryOperators ops = assemble_boundary_operators(curve);
  Spectrum spectrum = solve_spectrum(ops.Kstar);
  EigenCluster cluster = [this] {
    double pair = 0.0;
    for (int i = 1; i + 1 < spectrum.values.size(); ++i) {
      if (spectrum.values[i] < 0.499 &&
          std::abs(spectrum.values[i] - spectrum.values[i + 1]) < 1e-7) {
        pair = spectrum.values[i];
        break;
      }
    }
    return extract_cluster(spectrum, pair, 0.01, ops.S, curve);
  }();
  PerturbationField theta = PerturbationField::from_function(
      curve,
      [](double t, const Vector2d&) {
        return Vector2d(std::cos(2 * t) + 0.2 * std::sin(t),
                        std::sin(3 * t) - 0.1 * std::cos(t));
      },
      "generic");
};

StarSetup& star_setup() {
  static StarSetup s;
  return s;
}

}  // namespace

TEST_CASE("elementary symmetric polynomials") {
  VectorXd v(3);
  v << 1, 2, 3;
  CHECK(symmetric_function(1, v) == 6.0);
  CHECK(symmetric_function(2, v) == 11.0);
  CHECK(symmetric_function(3, v) == 6.0);
  CHECK_THROWS_AS(symmetric_function(0, v), std::invalid_argument);
  CHECK_THROWS_AS(symmetric_function(4, v), std::invalid_argument);

  SECTION("equal arguments collapse to binomials") {
    const double lambda = 0.37;
    for (int m : {2, 4, 6}) {
      const VectorXd u = VectorXd::Constant(m, lambda);
      for (int h = 1; h <= m; ++h)
        CHECK(std::abs(symmetric_function(h, u) -
                       binomial(m, h) * std::pow(lambda, h)) <= 1e-14);
    }
  }
  SECTION("characteristic polynomial coefficients of a random symmetric matrix") {
    std::mt19937 rng(3);
    std::normal_distribution<double> gauss;
    MatrixXd a(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = gauss(rng);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    const VectorXd xi = es.eigenvalues();
    for (double tau : {0.3, -0.7, 1.1}) {
      // det(A - tau I) = sum_h (-1)^h tau^h Lambda_{m-h}
      double expansion = std::pow(-tau, 4);
      for (int h = 0; h < 4; ++h)
        expansion += std::pow(-tau, h) * symmetric_function(4 - h, xi);
      const double det = (a - tau * MatrixXd::Identity(4, 4)).determinant();
      CHECK(std::abs(det - expansion) <= 1e-12 * std::max(1.0, std::abs(det)));
    }
  }
}

TEST_CASE("operator derivative dK") {
  auto& s = ellipse_setup();
  SECTION("constant density is annihilated") {
    CHECK(dK_operator(s.curve, s.ops, s.theta, VectorXd::Ones(256))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
  SECTION("tangential fields reduce to the transport-commutator pair") {
    const PerturbationField tang = s.theta.tangential_part(s.curve);
    const DKTerms terms = dK_operator_terms(s.curve, s.ops, tang, generic_density(s.curve));
    CHECK(terms.pv.cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(terms.t_term.cwiseAbs().maxCoeff() <= 1e-13);
  }
  SECTION("matches the finite difference of the pulled-back operator") {
    const DerivativeReport r =
        check_dK(s.curve, s.ops, s.theta, generic_density(s.curve), default_fd_steps());
    CHECK(r.rel_error <= 1e-6);
  }
}

TEST_CASE("cluster derivative on the simple ellipse eigenvalue") {
  auto& s = ellipse_setup();
  const ClusterDerivative cd = cluster_derivative_matrix(s.curve, s.ops, s.cluster, s.theta);
  CHECK(cd.m == 1);
  CHECK(cd.normal_route_difference <= 1e-9);
  CHECK(cd.gram_drift <= 1e-10);
  CHECK(std::abs(dLambda(cd, 1) - cd.dA.trace()) <= 1e-12);
  CHECK(std::abs(branch_derivatives(cd)[0] - cd.dA(0, 0)) <= 1e-12);

  SECTION("finite-difference oracle") {
    const DerivativeReport r =
        check_dLambda(s.curve, s.ops, s.cluster, s.theta, 1, default_fd_steps());
    CHECK(r.rel_error <= 1e-4);
  }
  SECTION("lambda = 1/2 fast path returns the zero matrix") {
    const EigenCluster half = extract_cluster(s.spectrum, 0.5, 0.05, s.ops.S, s.curve);
    const ClusterDerivative cdh = cluster_derivative_matrix(s.curve, s.ops, half, s.theta);
    CHECK(cdh.dA.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("lambda = 0 rejected") {
    EigenCluster fake = s.cluster;
    fake.lambda_bar = 0.0;
    CHECK_THROWS_AS(cluster_derivative_matrix(s.curve, s.ops, fake, s.theta),
                    std::invalid_argument);
  }
}

TEST_CASE("null derivative directions") {
  auto& s = ellipse_setup();
  for (const auto& [name, field] :
       std::vector<std::pair<std::string, PerturbationField>>{
           {"dilation", PerturbationField::dilation(s.curve)},
           {"translation", PerturbationField::translation(s.curve, {0.7, -0.3})},
           {"rotation", PerturbationField::rotation(s.curve)},
           {"tangential", s.theta.tangential_part(s.curve)}}) {
    INFO(name);
    const ClusterDerivative cd = cluster_derivative_matrix(s.curve, s.ops, s.cluster, field);
    CHECK(cd.dA.cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("dA depends on theta only through its normal component") {
  auto& s = ellipse_setup();
  const ClusterDerivative base = cluster_derivative_matrix(s.curve, s.ops, s.cluster, s.theta);
  // add an arbitrary tangential field
  VectorXd a(s.curve.size());
  for (int i = 0; i < s.curve.size(); ++i) a[i] = std::sin(5 * s.curve.params()[i]);
  MatrixX2d shifted = s.theta.values();
  for (int i = 0; i < s.curve.size(); ++i)
    shifted.row(i) += a[i] * s.curve.tangent().row(i);
  const PerturbationField theta2 =
      PerturbationField::from_values(s.curve, shifted, "theta+tangential");
  const ClusterDerivative cd2 = cluster_derivative_matrix(s.curve, s.ops, s.cluster, theta2);
  CHECK((cd2.dA - base.dA).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("dA is linear in theta") {
  auto& s = ellipse_setup();
  const PerturbationField t1 = s.theta;
  const PerturbationField t2 = PerturbationField::from_function(
      s.curve,
      [](double t, const Vector2d& x) { return Vector2d(std::sin(t), x[0]); }, "second");
  const double a = 1.7, b = -0.6;
  const PerturbationField combo(a * t1.values() + b * t2.values(),
                                a * t1.dvalues() + b * t2.dvalues(), "combo");
  const MatrixXd lhs = cluster_derivative_matrix(s.curve, s.ops, s.cluster, combo).dA;
  const MatrixXd rhs =
      a * cluster_derivative_matrix(s.curve, s.ops, s.cluster, t1).dA +
      b * cluster_derivative_matrix(s.curve, s.ops, s.cluster, t2).dA;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("degenerate cluster on the D4 star") {
  auto& s = star_setup();
  REQUIRE(s.cluster.m == 2);
  const ClusterDerivative cd = cluster_derivative_matrix(s.curve, s.ops, s.cluster, s.theta);
  CHECK((cd.dA - cd.dA.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(std::abs(dLambda(cd, 1) - cd.dA.trace()) <= 1e-12);
  CHECK(std::abs(branch_derivatives(cd).sum() - cd.dA.trace()) <= 1e-10);

  SECTION("symmetric functions match central finite differences") {
    for (int h : {1, 2}) {
      const DerivativeReport r =
          check_dLambda(s.curve, s.ops, s.cluster, s.theta, h, default_fd_steps());
      INFO("h = " << h);
      CHECK(r.rel_error <= 1e-4);
    }
  }
  SECTION("sorted branch derivatives match one-sided finite differences") {
    for (const DerivativeReport& r :
         check_branch_derivatives(s.curve, s.ops, s.cluster, s.theta, {1e-3, 5e-4})) {
      INFO(r.quantity);
      CHECK(r.rel_error <= 1e-4);
    }
  }
  SECTION("a D4-symmetric field keeps the branch derivatives equal") {
    VectorXd a(s.curve.size());
    for (int i = 0; i < s.curve.size(); ++i) a[i] = std::cos(4 * s.curve.params()[i]);
    const PerturbationField sym = PerturbationField::normal_bump(s.curve, a, "cos4t");
    const VectorXd br =
        branch_derivatives(cluster_derivative_matrix(s.curve, s.ops, s.cluster, sym));
    CHECK(std::abs(br[1] - br[0]) <= 1e-10);
  }
}

TEST_CASE("Lemma-first double integral collapses to the gradient pairing") {
  auto& s = ellipse_setup();
  const VectorXd mu_i = s.cluster.basis.col(0);
  const VectorXd mu_j = mu_i;  // m = 1 cluster
  const VectorXd smui = s.ops.S.apply(mu_i);
  const DKTerms terms = dK_operator_terms(s.curve, s.ops, s.theta, smui);
  const MatrixX2d gi = tangential_gradient(s.curve, smui);
  const MatrixX2d gj = tangential_gradient(s.curve, s.ops.S.apply(mu_j));
  const VectorXd tn = s.theta.normal_component(s.curve);
  double lhs = 0.0, rhs = 0.0;
  for (int i = 0; i < s.curve.size(); ++i) {
    lhs += s.curve.weights()[i] * terms.pv[i] * mu_j[i];
    rhs -= s.curve.weights()[i] * tn[i] * gi.row(i).dot(gj.row(i));
  }
  CHECK(std::abs(lhs - rhs) <= 1e-7);
}

TEST_CASE("Rellich-Pohozaev eigenvalue recovery") {
  auto& s = ellipse_setup();
  SECTION("both +-1/6 branches on the ellipse") {
    const VectorXd plus = pohozaev_lambda(s.curve, s.ops, s.cluster);
    CHECK(std::abs(plus[0] - s.cluster.lambdas[0]) <= 1e-6);
    const EigenCluster minus_cl =
        extract_cluster(s.spectrum, -1.0 / 6.0, 0.05, s.ops.S, s.curve);
    const VectorXd minus = pohozaev_lambda(s.curve, s.ops, minus_cl);
    CHECK(std::abs(minus[0] - minus_cl.lambdas[0]) <= 1e-6);
  }
  SECTION("translation and rotation variants vanish") {
    VectorXd znu(s.curve.size()), rnu(s.curve.size());
    const Vector2d zeta(0.7, -0.3);
    for (int i = 0; i < s.curve.size(); ++i) {
      znu[i] = zeta.dot(s.curve.nu(i));
      const Vector2d zx(-s.curve.node(i)[1], s.curve.node(i)[0]);
      rnu[i] = zx.dot(s.curve.nu(i));
    }
    const NullIdentityResidual tr = pohozaev_variant(s.curve, s.ops, s.cluster, znu);
    CHECK(tr.residual <= 1e-7 * std::max(tr.scale, 1.0));
    const NullIdentityResidual ro = pohozaev_variant(s.curve, s.ops, s.cluster, rnu);
    CHECK(ro.residual <= 1e-7 * std::max(ro.scale, 1.0));
  }
  SECTION("non-star-shaped curves are rejected") {
    const Curve shifted =
        perturb(s.curve, PerturbationField::translation(s.curve, {2.0, 0.0}), 1.0);
    const BoundaryOperators ops = assemble_boundary_operators(shifted);
    const Spectrum sp = solve_spectrum(ops.Kstar);
    const EigenCluster cl = extract_cluster(sp, 1.0 / 6.0, 0.05, ops.S, shifted);
    CHECK_THROWS_AS(pohozaev_lambda(shifted, ops, cl), std::domain_error);
  }
}

TEST_CASE("adjoint switch identity") {
  auto& s = ellipse_setup();
  SECTION("m = 1 ellipse cluster") {
    const SwitcherooReport r =
        switcheroo_check(s.curve, s.ops, s.cluster, s.theta, default_fd_steps());
    CHECK(r.max_residual <= 1e-5);
  }
  SECTION("m = 2 star cluster, all entries") {
    auto& st = star_setup();
    const SwitcherooReport r =
        switcheroo_check(st.curve, st.ops, st.cluster, st.theta, default_fd_steps());
    CHECK(r.max_residual <= 1e-5);
  }
  SECTION("tangential theta") {
    const SwitcherooReport r = switcheroo_check(
        s.curve, s.ops, s.cluster, s.theta.tangential_part(s.curve), default_fd_steps());
    CHECK(r.max_residual <= 1e-6);
  }
}

TEST_CASE("dLambda argument validation") {
  auto& s = ellipse_setup();
  const ClusterDerivative cd = cluster_derivative_matrix(s.curve, s.ops, s.cluster, s.theta);
  CHECK_THROWS_AS(dLambda(cd, 0), std::invalid_argument);
  CHECK_THROWS_AS(dLambda(cd, 2), std::invalid_argument);
}
