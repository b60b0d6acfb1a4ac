#include "npshape/geometry.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace npshape;

TEST_CASE("circle geometry is exact") {
  const Curve c = build_circle(1.0, 64);
  CHECK((c.curvature() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK(std::abs(c.weights().sum() - 2.0 * pi) <= 1e-12);
  CHECK(std::abs(c.enclosed_area() - pi) <= 1e-12);
  for (int i = 0; i < c.size(); ++i) {
    CHECK(std::abs(c.nu(i).dot(c.tau(i))) <= 1e-12);
    CHECK(std::abs(c.nu(i).norm() - 1.0) <= 1e-12);
    CHECK(std::abs(c.tau(i).norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("divergence-theorem areas") {
  CHECK(std::abs(build_ellipse(1.0, 0.5, 128).enclosed_area() - pi * 0.5) <= 1e-10);
  // kite area 1.5 pi and star area 1.02 pi from the closed-form shoelace
  // integrals of the parametrizations
  CHECK(std::abs(build_kite(128).enclosed_area() - 1.5 * pi) <= 1e-10);
  CHECK(std::abs(build_star(1.0, {{4, 0.2}}, 128).enclosed_area() - 1.02 * pi) <=
        1e-10);
}

TEST_CASE("star curve closes and refines consistently") {
  const Curve coarse = build_star(1.0, {{4, 0.2}}, 256);
  const Curve fine = build_star(1.0, {{4, 0.2}}, 512);
  const Curve interp = refine(coarse, 2);
  CHECK((interp.nodes() - fine.nodes()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((interp.curvature() - fine.curvature()).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("builder rejects degenerate parameters") {
  CHECK_THROWS_AS(build_circle(1.0, 15), std::invalid_argument);  // odd N
  CHECK_THROWS_AS(build_circle(1.0, 8), std::invalid_argument);   // N < 16
  CHECK_THROWS_AS(build_circle(-2.0, 64), std::invalid_argument);
  CHECK_THROWS_AS(build_ellipse(1.0, -0.5, 64), std::invalid_argument);
  // radial function dips below zero
  CHECK_THROWS_AS(build_star(1.0, {{4, 1.2}}, 64), std::invalid_argument);
}

TEST_CASE("perturb identity, dilation, composition") {
  const Curve c = build_ellipse(1.0, 0.5, 128);
  const PerturbationField theta = PerturbationField::from_function(
      c, [](double t, const Vector2d&) { return Vector2d(std::cos(2 * t), std::sin(3 * t)); },
      "fourier");

  SECTION("t = 0 reproduces the nodes bitwise") {
    const Curve c0 = perturb(c, theta, 0.0);
    CHECK(c0.nodes() == c.nodes());
  }
  SECTION("dilation scales the weights by 1 + t") {
    const Curve d = perturb(c, PerturbationField::dilation(c), 0.25);
    CHECK(((d.weights() / c.weights()) / 1.25 - 1.0).abs().maxCoeff() <= 1e-13);
  }
  SECTION("positions are affine in t") {
    const Curve cs = perturb(c, theta, 0.01);
    const PerturbationField pushed(theta.values(), theta.dvalues(), "pushed");
    const Curve cst = perturb(cs, pushed, 0.02);
    const Curve direct = perturb(c, theta, 0.03);
    CHECK((cst.nodes() - direct.nodes()).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SECTION("self-intersection heuristic rejects a pinch") {
    VectorXd a(c.size());
    for (int i = 0; i < c.size(); ++i)
      a[i] = -std::max(0.0, std::cos(8 * c.params()[i]));
    const PerturbationField pinch = PerturbationField::normal_bump(c, a, "pinch");
    CHECK_THROWS_AS(perturb(c, pinch, 0.6), std::invalid_argument);
  }
}

TEST_CASE("tangential gradient") {
  SECTION("constant density gives the zero field") {
    const Curve c = build_kite(64);
    CHECK(tangential_gradient(c, VectorXd::Constant(64, 3.7)).cwiseAbs().maxCoeff() <=
          1e-13);
  }
  SECTION("unit circle: d/ds cos = -sin along tau") {
    const Curve c = build_circle(1.0, 64);
    VectorXd f(64);
    for (int i = 0; i < 64; ++i) f[i] = std::cos(c.params()[i]);
    const MatrixX2d g = tangential_gradient(c, f);
    for (int i = 0; i < 64; ++i) {
      const Vector2d expected = -std::sin(c.params()[i]) * c.tau(i);
      CHECK((g.row(i).transpose() - expected).norm() <= 1e-13);
    }
  }
  SECTION("ellipse: grad of the coordinate trace x1 is tau1 tau") {
    const Curve c = build_ellipse(1.0, 0.5, 256);
    const MatrixX2d g = tangential_gradient(c, c.nodes().col(0));
    for (int i = 0; i < c.size(); ++i) {
      const Vector2d expected = c.tangent()(i, 0) * c.tau(i);
      CHECK((g.row(i).transpose() - expected).norm() <= 1e-10);
    }
  }
  SECTION("spectral exactness for trigonometric polynomials below Nyquist") {
    const Curve c = build_circle(1.0, 32);
    VectorXd f(32);
    for (int i = 0; i < 32; ++i) {
      const double t = c.params()[i];
      f[i] = std::cos(7 * t) - 2.0 * std::sin(5 * t);
    }
    const MatrixX2d g = tangential_gradient(c, f);
    for (int i = 0; i < 32; ++i) {
      const double t = c.params()[i];
      const double df = -7.0 * std::sin(7 * t) - 10.0 * std::cos(5 * t);
      CHECK((g.row(i).transpose() - df * c.tau(i)).norm() <= 1e-12);
    }
  }
  SECTION("zero normal component by construction") {
    const Curve c = build_star(1.0, {{4, 0.2}}, 128);
    VectorXd f(128);
    for (int i = 0; i < 128; ++i) f[i] = std::exp(std::sin(c.params()[i]));
    const MatrixX2d g = tangential_gradient(c, f);
    for (int i = 0; i < 128; ++i)
      CHECK(std::abs(g.row(i).dot(c.normal().row(i))) <= 1e-12);
  }
}

TEST_CASE("surface divergence matches the area-element derivative") {
  const Curve c = build_ellipse(1.0, 0.5, 128);
  const PerturbationField theta = PerturbationField::from_function(
      c,
      [](double t, const Vector2d&) {
        return Vector2d(std::cos(2 * t) + 0.3 * std::sin(t), std::sin(3 * t));
      },
      "generic");
  const VectorXd div = surface_divergence(c, theta);

  // (sigma_n[I + t theta] - 1)/t -> div theta, central differences with one
  // Richardson level
  std::vector<double> steps = {1e-4, 5e-5};
  std::vector<MatrixX2d> unused;
  VectorXd fd(c.size());
  {
    Eigen::MatrixXd quot(c.size(), 2);
    for (int k = 0; k < 2; ++k) {
      const double t = steps[k];
      const Curve cp = perturb(c, theta, t), cm = perturb(c, theta, -t);
      quot.col(k) = ((cp.weights() - cm.weights()) / (2.0 * t * c.weights())).matrix();
    }
    fd = (4.0 * quot.col(1) - quot.col(0)) / 3.0;
  }
  CHECK((fd - div).cwiseAbs().maxCoeff() <= 1e-9);

  SECTION("dilation has unit surface divergence") {
    const VectorXd d = surface_divergence(c, PerturbationField::dilation(c));
    CHECK((d.array() - 1.0).abs().maxCoeff() <= 1e-14);
  }
  SECTION("rigid translation has zero surface divergence") {
    const VectorXd d =
        surface_divergence(c, PerturbationField::translation(c, {0.3, -1.1}));
    CHECK(d.cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("normal derivative formula matches finite differences of normals") {
  const Curve c = build_kite(128);
  const PerturbationField theta = PerturbationField::from_function(
      c, [](double t, const Vector2d&) { return Vector2d(std::sin(2 * t), std::cos(t)); },
      "generic");
  const MatrixX2d formula = dt_normal(c, theta);
  auto fd_at = [&](double t) {
    return MatrixX2d((perturb(c, theta, t).normal() - perturb(c, theta, -t).normal()) /
                     (2.0 * t));
  };
  const MatrixX2d d1 = fd_at(1e-3), d2 = fd_at(5e-4);
  const double e1 = (d1 - formula).cwiseAbs().maxCoeff();
  const double e2 = (d2 - formula).cwiseAbs().maxCoeff();
  CHECK(e2 <= 0.3 * e1);  // O(t^2) central differences
  const MatrixX2d richardson = (4.0 * d2 - d1) / 3.0;
  CHECK((richardson - formula).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("perturbation field decomposition") {
  const Curve c = build_star(1.0, {{3, 0.15}}, 128);
  const PerturbationField theta = PerturbationField::from_function(
      c, [](double t, const Vector2d& x) { return Vector2d(x[1] * x[0], std::cos(t)); },
      "generic");
  const PerturbationField tang = theta.tangential_part(c);
  const VectorXd tn = theta.normal_component(c);
  for (int i = 0; i < c.size(); ++i) {
    CHECK(std::abs(tang.values().row(i).dot(c.normal().row(i))) <= 1e-12);
    const Vector2d rebuilt =
        tn[i] * c.nu(i) + tang.values().row(i).transpose();
    CHECK((rebuilt - theta.at(i)).norm() <= 1e-14);
  }
}
