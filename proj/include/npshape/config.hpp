#pragma once

// Experiment configuration: a JSON document (or CLI flags mapped onto the
// same fields) selecting curve, resolution, cluster target, perturbation
// field, FD steps and tolerances. Unknown keys are rejected. Every field has
// a default, listed next to it below and documented in the CLI help.

#include "npshape/geometry.hpp"
#include "npshape/version.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace npshape {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string curve = "ellipse:1,0.5";    // circle:r | ellipse:a,b | kite | star:c0,amp@freq,...
  std::vector<int> n_values = {256};      // node counts; sweeps use the full list
  std::optional<double> lambda;           // cluster target (none = no cluster)
  double delta = 0.05;                    // cluster isolation radius
  std::string theta = "fourier:2,3";      // perturbation spec, see make_field
  std::vector<double> steps = {1e-3, 5e-4, 2.5e-4};  // FD step schedule
  std::string out_dir = ".";              // report directory
  double tol = 1e-4;                      // pass/fail threshold for FD checks
  std::string only;                       // identity filter (empty = all)
  bool sphere = false;                    // identities: run the sphere suite
  int kmax = 6;                           // sphere suite: max harmonic degree
  int grid_theta = 64;                    // sphere grid (polar x azimuth)
  int grid_phi = 128;
  int samples = 20;                       // sphere-crit: random fields
  unsigned seed = 1234;                   // RNG seed for random fields

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["curve"] = curve;
    j["N"] = n_values;
    if (lambda) j["lambda"] = *lambda;
    j["delta"] = delta;
    j["theta"] = theta;
    j["steps"] = steps;
    j["out"] = out_dir;
    j["tol"] = tol;
    j["only"] = only;
    j["sphere"] = sphere;
    j["kmax"] = kmax;
    j["grid"] = {grid_theta, grid_phi};
    j["samples"] = samples;
    j["seed"] = seed;
    return j;
  }

  std::string hash() const { return fnv1a_hex(to_json().dump()); }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {
      "curve", "N",    "lambda", "delta", "theta",   "steps", "out",
      "tol",   "only", "sphere", "kmax",  "grid",    "samples", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : known) ok = ok || (it.key() == k);
    if (!ok) throw ConfigError("unknown config key: \"" + it.key() + "\"");
  }
  ExperimentConfig c;
  try {
    if (j.contains("curve")) c.curve = j["curve"].get<std::string>();
    if (j.contains("N")) {
      c.n_values.clear();
      if (j["N"].is_array())
        for (const auto& v : j["N"]) c.n_values.push_back(v.get<int>());
      else
        c.n_values.push_back(j["N"].get<int>());
    }
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("delta")) c.delta = j["delta"].get<double>();
    if (j.contains("theta")) c.theta = j["theta"].get<std::string>();
    if (j.contains("steps")) {
      c.steps.clear();
      for (const auto& v : j["steps"]) c.steps.push_back(v.get<double>());
    }
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("only")) c.only = j["only"].get<std::string>();
    if (j.contains("sphere")) c.sphere = j["sphere"].get<bool>();
    if (j.contains("kmax")) c.kmax = j["kmax"].get<int>();
    if (j.contains("grid")) {
      c.grid_theta = j["grid"].at(0).get<int>();
      c.grid_phi = j["grid"].at(1).get<int>();
    }
    if (j.contains("samples")) c.samples = j["samples"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (c.n_values.empty()) throw ConfigError("config field \"N\" is empty");
  return c;
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string::npos ? p : p - start));
    if (p == std::string::npos) break;
    start = p + 1;
  }
  return out;
}

inline double parse_num(const std::string& s, const std::string& field) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    throw ConfigError("malformed number \"" + s + "\" in field \"" + field + "\"");
  }
}

}  // namespace detail

// circle:r | ellipse:a,b | kite | star:c0,amp@freq[,amp@freq...]
inline Curve make_curve(const std::string& spec, int n) {
  const size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string args =
      colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  try {
    if (kind == "circle") return build_circle(detail::parse_num(args, "curve"), n);
    if (kind == "ellipse") {
      const auto p = detail::split(args, ',');
      if (p.size() != 2) throw ConfigError("curve \"ellipse\" needs a,b");
      return build_ellipse(detail::parse_num(p[0], "curve"),
                           detail::parse_num(p[1], "curve"), n);
    }
    if (kind == "kite") return build_kite(n);
    if (kind == "star") {
      const auto p = detail::split(args, ',');
      if (p.empty()) throw ConfigError("curve \"star\" needs c0[,amp@freq...]");
      std::vector<StarTerm> terms;
      for (size_t i = 1; i < p.size(); ++i) {
        const auto at = p[i].find('@');
        if (at == std::string::npos)
          throw ConfigError("star term \"" + p[i] + "\" must be amp@freq");
        terms.push_back(
            StarTerm{static_cast<int>(detail::parse_num(p[i].substr(at + 1), "curve")),
                     detail::parse_num(p[i].substr(0, at), "curve")});
      }
      return build_star(detail::parse_num(p[0], "curve"), terms, n);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid curve parameters: ") + e.what());
  }
  throw ConfigError("unknown curve kind \"" + kind + "\" in field \"curve\"");
}

// dilation | translation:zx,zy | rotation | normal:k (cos(kt) nu) |
// fourier:k1,k2 ((cos k1 t, sin k2 t)) | tangential:k1,k2 (its tangential part)
inline PerturbationField make_field(const std::string& spec, const Curve& c) {
  const size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string args =
      colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (kind == "dilation") return PerturbationField::dilation(c);
  if (kind == "rotation") return PerturbationField::rotation(c);
  if (kind == "translation") {
    const auto p = detail::split(args, ',');
    if (p.size() != 2) throw ConfigError("theta \"translation\" needs zx,zy");
    return PerturbationField::translation(
        c, {detail::parse_num(p[0], "theta"), detail::parse_num(p[1], "theta")});
  }
  if (kind == "normal") {
    const int k = static_cast<int>(detail::parse_num(args, "theta"));
    VectorXd a(c.size());
    for (int i = 0; i < c.size(); ++i) a[i] = std::cos(k * c.params()[i]);
    return PerturbationField::normal_bump(c, a, spec);
  }
  if (kind == "fourier" || kind == "tangential") {
    const auto p = detail::split(args, ',');
    if (p.size() != 2) throw ConfigError("theta \"" + kind + "\" needs k1,k2");
    const int k1 = static_cast<int>(detail::parse_num(p[0], "theta"));
    const int k2 = static_cast<int>(detail::parse_num(p[1], "theta"));
    PerturbationField f = PerturbationField::from_function(
        c,
        [k1, k2](double t, const Vector2d&) {
          return Vector2d(std::cos(k1 * t), std::sin(k2 * t));
        },
        spec);
    return kind == "tangential" ? f.tangential_part(c) : f;
  }
  throw ConfigError("unknown theta kind \"" + kind + "\" in field \"theta\"");
}

}  // namespace npshape
