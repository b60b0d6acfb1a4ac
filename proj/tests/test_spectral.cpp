#include "npshape/checks.hpp"
#include "npshape/spectral.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

using namespace npshape;

namespace {

struct EllipseSetup {
  Curve curve = build_ellipse(1.0, 0.5, 256);
  BoundaryOperators ops = assemble_boundary_operators(curve);
  Spectrum spectrum = solve_spectrum(ops.Kstar);
};

EllipseSetup& ellipse_setup() {
  static EllipseSetup s;
  return s;
}

}  // namespace

TEST_CASE("ellipse spectrum matches the separation-of-variables oracle") {
  auto& s = ellipse_setup();
  // q = (a-b)/(a+b) = 1/3; nonzero spectrum {1/2} and +-q^k/2, each simple
  const std::vector<double> oracle = ellipse_np_eigenvalues(1.0, 0.5, 8);
  std::set<int> used;
  for (double target : oracle) {
    int best = -1;
    double dist = 1e300;
    for (int i = 0; i < s.spectrum.values.size(); ++i) {
      if (used.count(i)) continue;
      const double d = std::abs(s.spectrum.values[i] - target);
      if (d < dist) {
        dist = d;
        best = i;
      }
    }
    used.insert(best);  // distinct indices: the oracle eigenvalues are simple
    CHECK(dist <= 1e-8);
  }
  CHECK(s.spectrum.max_imag <= 1e-8);
  CHECK(s.spectrum.complex_flagged.empty());
}

TEST_CASE("circle spectrum is {1/2, 0, 0, ...}") {
  const Curve c = build_circle(1.0, 64);
  const Spectrum sp = solve_spectrum(assemble_Kstar(c));
  CHECK(std::abs(sp.values[0] - 0.5) <= 1e-13);
  CHECK(std::abs(sp.values[1]) <= 1e-10);
  CHECK(std::abs(sp.values[sp.values.size() - 1]) <= 1e-10);
}

TEST_CASE("1/2 is always an eigenvalue, with constant adjoint eigenfunction") {
  for (const Curve& c :
       {build_kite(192), build_star(1.0, {{4, 0.2}}, 192), build_ellipse(1.0, 0.5, 192)}) {
    const BoundaryOperators ops = assemble_boundary_operators(c);
    const Spectrum sp = solve_spectrum(ops.Kstar);
    CHECK(std::abs(sp.values[0] - 0.5) <= 1e-10);
    // K[1] = 1/2 is the adjoint statement of the constant eigenfunction
    CHECK((ops.K.apply(VectorXd::Ones(c.size())).array() - 0.5).abs().maxCoeff() <=
          1e-10);
  }
}

TEST_CASE("cluster extraction") {
  auto& s = ellipse_setup();
  SECTION("simple eigenvalue 1/6") {
    const EigenCluster cl = extract_cluster(s.spectrum, 1.0 / 6.0, 0.05, s.ops.S, s.curve);
    CHECK(cl.m == 1);
    CHECK(std::abs(cl.lambdas[0] - 1.0 / 6.0) <= 1e-10);
    CHECK(cl.sigma_s_orthonormal);
    const MatrixXd ws = s.curve.weights().matrix().asDiagonal() * s.ops.S.matrix;
    const MatrixXd gram = cl.basis.transpose() * ws * cl.basis;
    CHECK((gram - MatrixXd::Identity(1, 1)).cwiseAbs().maxCoeff() <= 1e-10);
    const VectorXd r = s.ops.Kstar.apply(cl.basis.col(0)) - cl.lambdas[0] * cl.basis.col(0);
    CHECK(r.norm() <= 1e-8 * cl.basis.col(0).norm());
  }
  SECTION("D4 star carries an exactly degenerate pair") {
    const Curve star = build_star(1.0, {{4, 0.2}}, 256);
    const BoundaryOperators ops = assemble_boundary_operators(star);
    const Spectrum sp = solve_spectrum(ops.Kstar);
    double pair = 0.0;
    for (int i = 1; i + 1 < sp.values.size(); ++i) {
      if (sp.values[i] < 0.499 && std::abs(sp.values[i] - sp.values[i + 1]) < 1e-7) {
        pair = sp.values[i];
        break;
      }
    }
    REQUIRE(pair > 0.0);
    const EigenCluster cl = extract_cluster(sp, pair, 0.01, ops.S, star);
    CHECK(cl.m == 2);
    CHECK(std::abs(cl.lambdas[1] - cl.lambdas[0]) <= 1e-10);
    const MatrixXd ws = star.weights().matrix().asDiagonal() * ops.S.matrix;
    const MatrixXd gram = cl.basis.transpose() * ws * cl.basis;
    CHECK((gram - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
    // residual of K* off the extracted span
    MatrixXd proj = cl.basis * (cl.basis.transpose() * ws);
    const MatrixXd image = s.ops.Kstar.matrix.rows() == 0
                               ? MatrixXd()
                               : ops.Kstar.matrix * cl.basis;
    const MatrixXd off = image - proj * image;
    CHECK(off.cwiseAbs().maxCoeff() <= 1e-8);
  }
  SECTION("lambda = 1/2 clusters have m = 1 on every curve") {
    for (const Curve& c : {build_ellipse(1.0, 0.5, 192), build_kite(192),
                           build_star(1.0, {{4, 0.2}}, 192)}) {
      const BoundaryOperators ops = assemble_boundary_operators(c);
      const Spectrum sp = solve_spectrum(ops.Kstar);
      const EigenCluster cl = extract_cluster(sp, 0.5, 0.05, ops.S, c);
      CHECK(cl.m == 1);
    }
  }
  SECTION("isolation violation names the intruder") {
    CHECK_THROWS_WITH(extract_cluster(s.spectrum, 1.0 / 6.0, 0.107, s.ops.S, s.curve),
                      ter::ContainsSubstring("0.055"));
  }
  SECTION("windows touching 0 or 1/2 are rejected") {
    CHECK_THROWS_AS(extract_cluster(s.spectrum, 0.02, 0.05, s.ops.S, s.curve),
                    std::invalid_argument);
    CHECK_THROWS_AS(extract_cluster(s.spectrum, 0.45, 0.08, s.ops.S, s.curve),
                    std::invalid_argument);
  }
}

TEST_CASE("Riesz projector") {
  auto& s = ellipse_setup();
  const EigenCluster cl = extract_cluster(s.spectrum, 1.0 / 6.0, 0.05, s.ops.S, s.curve);
  const RieszProjector p = riesz_projector(s.ops.Kstar, 1.0 / 6.0, 0.025, 32, &s.spectrum);
  CHECK(p.max_imag <= 1e-10);
  CHECK((p.matrix * p.matrix - p.matrix).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(p.rank == 1);
  CHECK((p.matrix * cl.basis.col(0) - cl.basis.col(0)).cwiseAbs().maxCoeff() <= 1e-8);

  SECTION("contour independence") {
    const RieszProjector p2 = riesz_projector(s.ops.Kstar, 1.0 / 6.0, 0.04, 48, &s.spectrum);
    CHECK((p.matrix - p2.matrix).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SECTION("a contour around two eigenvalues projects onto both eigenspaces") {
    const RieszProjector p2 = riesz_projector(s.ops.Kstar, 0.111, 0.08, 48, &s.spectrum);
    CHECK(p2.rank == 2);
    const EigenCluster cl18 = extract_cluster(s.spectrum, 1.0 / 18.0, 0.02, s.ops.S, s.curve);
    CHECK((p2.matrix * cl18.basis.col(0) - cl18.basis.col(0)).cwiseAbs().maxCoeff() <=
          1e-8);
  }
  SECTION("contours grazing the spectrum are rejected") {
    CHECK_THROWS_AS(riesz_projector(s.ops.Kstar, 1.0 / 6.0, 1.0 / 6.0 - 1.0 / 18.0, 32,
                                    &s.spectrum),
                    std::runtime_error);
  }
}

TEST_CASE("plasmonic correspondence") {
  CHECK(plasmonic_eps(0.0) == 1.0);
  CHECK(plasmonic_eps(1.0 / 6.0) == 2.0);
  CHECK_THROWS_AS(plasmonic_eps(0.5), std::domain_error);

  auto& s = ellipse_setup();
  const EigenCluster cl = extract_cluster(s.spectrum, 1.0 / 6.0, 0.05, s.ops.S, s.curve);
  const PlasmonicReport rep =
      verify_plasmonic(s.curve, cl, spread_nodes(s.curve), default_offsets(s.curve));
  CHECK(rep.eps == 2.0);
  CHECK(rep.max_trace_residual <= 1e-5);
  CHECK(rep.max_flux_residual <= 1e-5);
}

TEST_CASE("eigenfunctions with lambda != 1/2 have zero mean") {
  auto& s = ellipse_setup();
  CHECK(mean_zero_residual(s.curve, s.spectrum) <= 1e-9);
  const Curve star = build_star(1.0, {{4, 0.2}}, 192);
  CHECK(mean_zero_residual(star, solve_spectrum(assemble_Kstar(star))) <= 1e-9);
}

TEST_CASE("Kellogg bound") {
  auto& s = ellipse_setup();
  CHECK(kellogg_excess(s.spectrum) <= 1e-8);
  const Curve kite = build_kite(192);
  CHECK(kellogg_excess(solve_spectrum(assemble_Kstar(kite))) <= 1e-8);
}

TEST_CASE("eigenvalue continuity under perturbation is O(t)") {
  const Curve c = build_ellipse(1.0, 0.5, 192);
  const BoundaryOperators ops = assemble_boundary_operators(c);
  VectorXd a(c.size());
  for (int i = 0; i < c.size(); ++i) a[i] = std::cos(2 * c.params()[i]);
  const PerturbationField theta = PerturbationField::normal_bump(c, a, "normal:2");
  std::vector<double> errors;
  for (double t : {1e-2, 1e-3, 1e-4}) {
    const Spectrum sp = solve_spectrum(assemble_Kstar(perturb(c, theta, t)));
    double best = 1e300;
    for (int i = 0; i < sp.values.size(); ++i)
      best = std::min(best, std::abs(sp.values[i] - 1.0 / 6.0));
    errors.push_back(best);
  }
  CHECK(errors[1] < errors[0]);
  CHECK(errors[2] < errors[1]);
  // linear decay: one decade in t shrinks the error by close to a decade
  CHECK(errors[1] / errors[0] <= 0.2);
  CHECK(errors[2] / errors[1] <= 0.2);
}

TEST_CASE("spectrum is invariant under dilation, translation, rotation") {
  const Curve c = build_ellipse(1.0, 0.5, 128);
  const Spectrum base = solve_spectrum(assemble_Kstar(c));
  auto sorted = [](Spectrum sp) {
    std::sort(sp.values.data(), sp.values.data() + sp.values.size());
    return sp.values;
  };
  const VectorXd ref = sorted(base);
  for (const auto& [name, field, t] :
       std::vector<std::tuple<std::string, PerturbationField, double>>{
           {"dilation", PerturbationField::dilation(c), 0.3},
           {"translation", PerturbationField::translation(c, {0.7, -0.4}), 1.0},
           {"rotation", PerturbationField::rotation(c), 0.5}}) {
    INFO(name);
    const VectorXd moved = sorted(solve_spectrum(assemble_Kstar(perturb(c, field, t))));
    CHECK((moved - ref).cwiseAbs().maxCoeff() <= 1e-10);
  }
}
