// np-shape: batch front-end for NP-spectrum experiments.
//
// Verbs: spectrum | deriv-check | identities | pohozaev | sphere-crit |
// convergence. Each verb reads the shared config (JSON file via --config,
// overridden by flags), writes machine-readable reports into --out, and
// prints a short summary. Exit codes: 0 pass, 1 tolerance failure,
// 2 usage/config error.

#include "npshape/npshape.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace npshape;

struct RawFlags {
  std::string config_path;
  std::string curve, theta, out_dir, only, steps_csv, n_csv, grid_csv;
  double lambda = 0.0, delta = 0.0, tol = 0.0;
  bool sphere = false;
  int kmax = 0, samples = 0;
  unsigned seed = 0;
};

void add_common_flags(CLI::App* cmd, RawFlags& raw) {
  cmd->add_option("--config", raw.config_path, "JSON config file (defaults apply)");
  cmd->add_option("--curve", raw.curve,
                  "curve spec: circle:r | ellipse:a,b | kite | star:c0,amp@freq,...");
  cmd->add_option("--N", raw.n_csv, "node count, or comma list for sweeps");
  cmd->add_option("--lambda", raw.lambda, "cluster target eigenvalue");
  cmd->add_option("--delta", raw.delta, "cluster isolation radius (default 0.05)");
  cmd->add_option("--theta", raw.theta,
                  "perturbation: dilation | translation:zx,zy | rotation | "
                  "normal:k | fourier:k1,k2 | tangential:k1,k2");
  cmd->add_option("--steps", raw.steps_csv, "FD step schedule, comma list");
  cmd->add_option("--out", raw.out_dir, "output directory (default .)");
  cmd->add_option("--tol", raw.tol, "FD pass/fail tolerance (default 1e-4)");
  cmd->add_option("--only", raw.only, "run a single identity by name");
  cmd->add_flag("--sphere", raw.sphere, "identities: sphere suite instead of curve");
  cmd->add_option("--kmax", raw.kmax, "sphere suite: max harmonic degree (default 6)");
  cmd->add_option("--grid", raw.grid_csv, "sphere grid n_theta,n_phi (default 64,128)");
  cmd->add_option("--samples", raw.samples, "sphere-crit: random fields (default 20)");
  cmd->add_option("--seed", raw.seed, "RNG seed (default 1234)");
}

ExperimentConfig build_config(const CLI::App* cmd, const RawFlags& raw) {
  ExperimentConfig cfg;
  if (!raw.config_path.empty()) {
    std::ifstream in(raw.config_path);
    if (!in) throw ConfigError("cannot open config file: " + raw.config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    cfg = config_from_json(j);
  }
  auto given = [&](const std::string& name) { return cmd->count(name) > 0; };
  if (given("--curve")) cfg.curve = raw.curve;
  if (given("--N")) {
    cfg.n_values.clear();
    for (const auto& tok : detail::split(raw.n_csv, ','))
      cfg.n_values.push_back(static_cast<int>(detail::parse_num(tok, "N")));
  }
  if (given("--lambda")) cfg.lambda = raw.lambda;
  if (given("--delta")) cfg.delta = raw.delta;
  if (given("--theta")) cfg.theta = raw.theta;
  if (given("--steps")) {
    cfg.steps.clear();
    for (const auto& tok : detail::split(raw.steps_csv, ','))
      cfg.steps.push_back(detail::parse_num(tok, "steps"));
  }
  if (given("--out")) cfg.out_dir = raw.out_dir;
  if (given("--tol")) cfg.tol = raw.tol;
  if (given("--only")) cfg.only = raw.only;
  if (given("--sphere")) cfg.sphere = raw.sphere;
  if (given("--kmax")) cfg.kmax = raw.kmax;
  if (given("--grid")) {
    const auto p = detail::split(raw.grid_csv, ',');
    if (p.size() != 2) throw ConfigError("grid must be n_theta,n_phi");
    cfg.grid_theta = static_cast<int>(detail::parse_num(p[0], "grid"));
    cfg.grid_phi = static_cast<int>(detail::parse_num(p[1], "grid"));
  }
  if (given("--samples")) cfg.samples = raw.samples;
  if (given("--seed")) cfg.seed = raw.seed;
  if (cfg.n_values.empty()) throw ConfigError("field \"N\" is empty");
  return cfg;
}

json report_header(const ExperimentConfig& cfg) {
  json j;
  j["version"] = kVersion;
  j["config_hash"] = cfg.hash();
  j["config"] = cfg.to_json();
  return j;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return cfg.out_dir + "/" + name;
}

int cmd_spectrum(const ExperimentConfig& cfg) {
  const int n = cfg.n_values.back();
  const Curve c = make_curve(cfg.curve, n);
  const BoundaryOperators ops = assemble_boundary_operators(c);
  const Spectrum sp = solve_spectrum(ops.Kstar);

  json j = report_header(cfg);
  j["curve"] = c.descriptor();
  j["N"] = n;
  j["eigenvalues"] = vector_to_json(sp.values);
  j["max_imag"] = sp.max_imag;
  j["complex_flagged"] = sp.complex_flagged;
  j["clusters"] = json::array();
  if (cfg.lambda) {
    const EigenCluster cl = extract_cluster(sp, *cfg.lambda, cfg.delta, ops.S, c);
    json cj;
    cj["lambda_bar"] = cl.lambda_bar;
    cj["m"] = cl.m;
    cj["lambdas"] = vector_to_json(cl.lambdas);
    double resid = 0.0;
    for (int jb = 0; jb < cl.m; ++jb) {
      const VectorXd r =
          ops.Kstar.apply(cl.basis.col(jb)) - cl.lambdas[jb] * cl.basis.col(jb);
      resid = std::max(resid, r.norm() / cl.basis.col(jb).norm());
    }
    cj["residual"] = resid;
    cj["sigma_s_orthonormal"] = cl.sigma_s_orthonormal;
    j["clusters"].push_back(cj);
  }
  write_json(out_path(cfg, "spectrum.json"), j);

  auto csv = open_output(out_path(cfg, "spectrum.csv"));
  csv << "index,lambda\n";
  for (int i = 0; i < sp.values.size(); ++i)
    csv << i << ',' << num17(sp.values[i]) << '\n';
  write_curve_csv(out_path(cfg, "curve.csv"), c);

  std::printf("spectrum: %s N=%d  top:", c.descriptor().c_str(), n);
  for (int i = 0; i < std::min<int>(6, sp.values.size()); ++i)
    std::printf(" %.9f", sp.values[i]);
  std::printf("\n");
  return 0;
}

json report_to_json(const DerivativeReport& r, double tol) {
  json j;
  j["quantity"] = r.quantity;
  j["theta"] = r.theta_descriptor;
  j["steps"] = r.steps;
  j["fd_quotients"] = r.fd_quotients;
  j["fd_extrapolated"] = r.fd_extrapolated;
  j["formula"] = r.formula;
  j["abs_error"] = r.abs_error;
  j["rel_error"] = r.rel_error;
  j["tol"] = tol;
  j["pass"] = r.rel_error <= tol;
  return j;
}

int cmd_deriv_check(const ExperimentConfig& cfg) {
  if (!cfg.lambda) throw ConfigError("deriv-check needs --lambda");
  const int n = cfg.n_values.back();
  const Curve c = make_curve(cfg.curve, n);
  const BoundaryOperators ops = assemble_boundary_operators(c);
  const Spectrum sp = solve_spectrum(ops.Kstar);
  const EigenCluster cl = extract_cluster(sp, *cfg.lambda, cfg.delta, ops.S, c);
  const PerturbationField theta = make_field(cfg.theta, c);

  const ClusterDerivative cd = cluster_derivative_matrix(c, ops, cl, theta);
  const double sym_residual = (cd.dA - cd.dA.transpose()).cwiseAbs().maxCoeff();
  const double trace_residual = std::abs(dLambda(cd, 1) - cd.dA.trace());

  json j = report_header(cfg);
  j["curve"] = c.descriptor();
  j["N"] = n;
  j["cluster"] = {{"lambda_bar", cl.lambda_bar}, {"m", cl.m}};
  j["dA"] = matrix_to_json(cd.dA);
  j["dA_symmetry_residual"] = sym_residual;
  j["trace_consistency_residual"] = trace_residual;
  j["checks"] = json::array();

  bool all_pass = sym_residual <= 1e-9 && trace_residual <= 1e-12;
  std::vector<DerivativeReport> reports;
  const bool null_direction = std::abs(cd.dA.trace()) < 1e-6;
  if (null_direction) {
    // Invariance directions: the claim is |dA| = 0, not an FD match.
    DerivativeReport r;
    r.quantity = "|dA|_max (null direction)";
    r.theta_descriptor = theta.descriptor();
    r.formula = cd.dA.cwiseAbs().maxCoeff();
    r.abs_error = r.formula;
    r.rel_error = r.formula;
    json rj = report_to_json(r, 1e-7);
    all_pass = all_pass && (r.formula <= 1e-7);
    j["checks"].push_back(rj);
  } else {
    for (int h = 1; h <= cl.m; ++h)
      reports.push_back(check_dLambda(c, ops, cl, theta, h, cfg.steps));
    std::vector<double> branch_steps(cfg.steps.begin(),
                                     cfg.steps.begin() +
                                         std::min<size_t>(2, cfg.steps.size()));
    for (const auto& r : check_branch_derivatives(c, ops, cl, theta, branch_steps))
      reports.push_back(r);
    reports.push_back(check_dK(c, ops, theta, ops.S.apply(cl.basis.col(0)),
                               cfg.steps));
    for (const auto& r : reports) {
      j["checks"].push_back(report_to_json(r, cfg.tol));
      all_pass = all_pass && (r.rel_error <= cfg.tol);
    }
  }
  j["pass"] = all_pass;
  write_json(out_path(cfg, "deriv_check.json"), j);

  auto csv = open_output(out_path(cfg, "deriv_check.csv"));
  csv << "quantity,formula,oracle,rel_err,pass\n";
  for (const auto& rj : j["checks"])
    csv << rj["quantity"].get<std::string>() << ','
        << num17(rj["formula"].get<double>()) << ','
        << num17(rj["fd_extrapolated"].is_null()
                     ? 0.0
                     : rj.value("fd_extrapolated", 0.0))
        << ',' << num17(rj["rel_error"].get<double>()) << ','
        << (rj["pass"].get<bool>() ? "PASS" : "FAIL") << '\n';

  for (const auto& rj : j["checks"])
    std::printf("%-28s rel_err %.3e %s\n", rj["quantity"].get<std::string>().c_str(),
                rj["rel_error"].get<double>(),
                rj["pass"].get<bool>() ? "PASS" : "FAIL");
  std::printf("deriv-check: %s\n", all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 1;
}

int cmd_identities(const ExperimentConfig& cfg) {
  std::vector<IdentityResult> results;
  json j = report_header(cfg);
  if (cfg.sphere) {
    results = run_sphere_identities(cfg.kmax, cfg.grid_theta, cfg.grid_phi, cfg.only);
    j["suite"] = "sphere";
    j["kmax"] = cfg.kmax;
  } else {
    const Curve c = make_curve(cfg.curve, cfg.n_values.back());
    results = run_curve_identities(c, cfg.only);
    j["suite"] = "curve";
    j["curve"] = c.descriptor();
    j["N"] = cfg.n_values.back();
  }
  if (results.empty())
    throw ConfigError("no identity matches --only \"" + cfg.only + "\"");
  bool all_pass = true;
  j["identities"] = json::array();
  for (const auto& r : results) {
    j["identities"].push_back({{"name", r.name},
                               {"residual", r.residual},
                               {"tol", r.tol},
                               {"pass", r.pass}});
    all_pass = all_pass && r.pass;
    std::printf("%-22s residual %.3e tol %.1e %s\n", r.name.c_str(), r.residual,
                r.tol, r.pass ? "PASS" : "FAIL");
  }
  j["pass"] = all_pass;
  write_json(out_path(cfg, "identities.json"), j);
  std::printf("identities: %s\n", all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 1;
}

int cmd_pohozaev(const ExperimentConfig& cfg) {
  if (!cfg.lambda) throw ConfigError("pohozaev needs --lambda");
  const int n = cfg.n_values.back();
  const Curve c = make_curve(cfg.curve, n);
  const BoundaryOperators ops = assemble_boundary_operators(c);
  const Spectrum sp = solve_spectrum(ops.Kstar);
  const EigenCluster cl = extract_cluster(sp, *cfg.lambda, cfg.delta, ops.S, c);

  const VectorXd recovered = pohozaev_lambda(c, ops, cl);
  double worst = 0.0;
  for (int jb = 0; jb < cl.m; ++jb)
    worst = std::max(worst, std::abs(recovered[jb] - cl.lambdas[jb]));

  VectorXd znu(c.size());
  const Vector2d zeta(0.7, -0.3);
  for (int i = 0; i < c.size(); ++i) znu[i] = zeta.dot(c.nu(i));
  const NullIdentityResidual translation = pohozaev_variant(c, ops, cl, znu);
  VectorXd rnu(c.size());
  for (int i = 0; i < c.size(); ++i) {
    const Vector2d zx(-c.node(i)[1], c.node(i)[0]);
    rnu[i] = zx.dot(c.nu(i));
  }
  const NullIdentityResidual rotation = pohozaev_variant(c, ops, cl, rnu);

  const bool pass = worst <= 1e-6 &&
                    translation.residual <= 1e-7 * std::max(translation.scale, 1.0) &&
                    rotation.residual <= 1e-7 * std::max(rotation.scale, 1.0);

  json j = report_header(cfg);
  j["curve"] = c.descriptor();
  j["N"] = n;
  j["lambda_spectral"] = vector_to_json(cl.lambdas);
  j["lambda_recovered"] = vector_to_json(recovered);
  j["max_error"] = worst;
  j["translation_variant"] = {{"residual", translation.residual},
                              {"scale", translation.scale}};
  j["rotation_variant"] = {{"residual", rotation.residual},
                           {"scale", rotation.scale}};
  j["pass"] = pass;
  write_json(out_path(cfg, "pohozaev.json"), j);

  std::printf("pohozaev: lambda %.9f recovered %.9f err %.3e %s\n", cl.lambdas[0],
              recovered[0], worst, pass ? "PASS" : "FAIL");
  return pass ? 0 : 1;
}

int cmd_sphere_crit(const ExperimentConfig& cfg) {
  const SphereGrid grid = make_sphere_grid(cfg.grid_theta, cfg.grid_phi);
  json j = report_header(cfg);
  j["grid"] = {cfg.grid_theta, cfg.grid_phi};
  j["groups"] = json::array();
  bool all_pass = true;
  const int kmax = std::max(1, std::min(cfg.kmax, 3));
  for (int k = 1; k <= kmax; ++k) {
    const HarmonicBasis basis = evaluate_harmonics(grid, k);
    double worst = 0.0, offdiag = 0.0;
    for (int s = 0; s < cfg.samples; ++s) {
      const Eigen::ArrayXd field =
          random_bandlimited_field(grid, 6, cfg.seed + static_cast<unsigned>(s));
      const SphereClusterDerivative d = sphere_cluster_derivative(grid, basis, field);
      worst = std::max(worst, std::abs(d.trace) / field.abs().maxCoeff());
      for (int a = 0; a < d.matrix.rows(); ++a)
        for (int b = 0; b < d.matrix.cols(); ++b)
          if (a != b) offdiag = std::max(offdiag, std::abs(d.matrix(a, b)));
    }
    const bool pass = worst <= 1e-9;
    all_pass = all_pass && pass;
    j["groups"].push_back({{"k", k},
                           {"d_k", 2 * k + 1},
                           {"max_trace_over_field", worst},
                           {"max_offdiagonal", offdiag},
                           {"tol", 1e-9},
                           {"pass", pass}});
    std::printf("k=%d dLambda_1 residual %.3e (off-diag scale %.3e) %s\n", k, worst,
                offdiag, pass ? "PASS" : "FAIL");
  }
  j["pass"] = all_pass;
  write_json(out_path(cfg, "sphere_crit.json"), j);
  std::printf("sphere-crit: %s\n", all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 1;
}

int cmd_convergence(const ExperimentConfig& cfg) {
  const size_t colon = cfg.curve.find(':');
  const std::string kind = cfg.curve.substr(0, colon);
  auto csv = open_output(out_path(cfg, "convergence.csv"));
  csv << "N,quantity,error\n";
  std::vector<double> eig_errors;
  for (int n : cfg.n_values) {
    const Curve c = make_curve(cfg.curve, n);
    const BoundaryOperators ops = assemble_boundary_operators(c);
    const Spectrum sp = solve_spectrum(ops.Kstar);
    double eig_err = -1.0;
    if (kind == "ellipse") {
      const auto p = detail::split(cfg.curve.substr(colon + 1), ',');
      eig_err = spectrum_match_error(
          sp, ellipse_np_eigenvalues(detail::parse_num(p[0], "curve"),
                                     detail::parse_num(p[1], "curve"), 8));
    } else if (kind == "circle") {
      eig_err = spectrum_match_error(sp, {0.5});
    }
    if (eig_err >= 0.0) {
      csv << n << ",eigenvalue_error," << num17(eig_err) << '\n';
      eig_errors.push_back(eig_err);
    }
    const double calderon =
        (ops.K.matrix * ops.S.matrix - ops.S.matrix * ops.Kstar.matrix)
            .cwiseAbs()
            .maxCoeff();
    csv << n << ",calderon_residual," << num17(calderon) << '\n';
    std::printf("N=%4d eig_err %s calderon %.3e\n", n,
                eig_err >= 0 ? num17(eig_err).c_str() : "n/a", calderon);
  }
  bool monotone = true;
  for (size_t i = 1; i < eig_errors.size(); ++i)
    monotone = monotone && (eig_errors[i] <= eig_errors[i - 1] ||
                            eig_errors[i] < 1e-10);
  if (!eig_errors.empty())
    std::printf("convergence: %s\n", monotone ? "PASS" : "FAIL");
  return (eig_errors.empty() || monotone) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NP-spectrum shape sensitivity toolkit"};
  app.require_subcommand(1);
  RawFlags raw;

  CLI::App* sub_spectrum = app.add_subcommand("spectrum", "eigenvalues of K*");
  CLI::App* sub_deriv = app.add_subcommand(
      "deriv-check", "cluster derivative formulas vs finite differences");
  CLI::App* sub_ident = app.add_subcommand("identities", "identity residual suite");
  CLI::App* sub_poho =
      app.add_subcommand("pohozaev", "Rellich-Pohozaev eigenvalue recovery");
  CLI::App* sub_crit = app.add_subcommand(
      "sphere-crit", "trace-derivative criticality of the sphere");
  CLI::App* sub_conv = app.add_subcommand("convergence", "error vs N sweep");
  for (CLI::App* cmd :
       {sub_spectrum, sub_deriv, sub_ident, sub_poho, sub_crit, sub_conv})
    add_common_flags(cmd, raw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const CLI::App* active = app.get_subcommands().front();
    const ExperimentConfig cfg = build_config(active, raw);
    if (active == sub_spectrum) return cmd_spectrum(cfg);
    if (active == sub_deriv) return cmd_deriv_check(cfg);
    if (active == sub_ident) return cmd_identities(cfg);
    if (active == sub_poho) return cmd_pohozaev(cfg);
    if (active == sub_crit) return cmd_sphere_crit(cfg);
    if (active == sub_conv) return cmd_convergence(cfg);
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
