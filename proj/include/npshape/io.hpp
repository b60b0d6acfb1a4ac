#pragma once

// CSV and JSON output. CSV files carry a header row; JSON is pretty-printed
// with sorted keys (nlohmann's object ordering), so identical inputs produce
// byte-identical files.

#include "npshape/geometry.hpp"
#include "npshape/layer.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace npshape {

using nlohmann::json;

inline std::string num17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

// Columns: t, x1, x2, nu1, nu2, kappa, w.
inline void write_curve_csv(std::ostream& out, const Curve& c) {
  out << "t,x1,x2,nu1,nu2,kappa,w\n";
  for (int i = 0; i < c.size(); ++i) {
    out << num17(c.params()[i]) << ',' << num17(c.nodes()(i, 0)) << ','
        << num17(c.nodes()(i, 1)) << ',' << num17(c.normal()(i, 0)) << ','
        << num17(c.normal()(i, 1)) << ',' << num17(c.curvature()[i]) << ','
        << num17(c.weights()[i]) << '\n';
  }
}

inline void write_curve_csv(const std::string& path, const Curve& c) {
  auto out = open_output(path);
  write_curve_csv(out, c);
}

// Dense operator dump for external diffing; row-major, one matrix row per line.
inline void write_matrix_csv(std::ostream& out, const MatrixXd& m) {
  out << "# rows=" << m.rows() << " cols=" << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << num17(m(i, j));
    out << '\n';
  }
}

inline void write_matrix_csv(const std::string& path, const MatrixXd& m) {
  auto out = open_output(path);
  write_matrix_csv(out, m);
}

// Density columns aligned with the curve node file: t, <name_1>, ...
inline void write_densities_csv(std::ostream& out, const Curve& c,
                                const std::vector<std::string>& names,
                                const std::vector<VectorXd>& columns) {
  if (names.size() != columns.size())
    throw std::invalid_argument("write_densities_csv: name/column mismatch");
  out << "t";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (int i = 0; i < c.size(); ++i) {
    out << num17(c.params()[i]);
    for (const auto& col : columns) out << ',' << num17(col[i]);
    out << '\n';
  }
}

inline void write_densities_csv(const std::string& path, const Curve& c,
                                const std::vector<std::string>& names,
                                const std::vector<VectorXd>& columns) {
  auto out = open_output(path);
  write_densities_csv(out, c, names, columns);
}

inline json vector_to_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json matrix_to_json(const MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

inline void write_json(const std::string& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace npshape
