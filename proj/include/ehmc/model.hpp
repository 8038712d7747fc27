#pragma once

// Problem definition: per-region quadratic potentials, affine constraint
// pieces, the hyperplane bank and the lookup table tying them together.
//
// Region indices are 0-based throughout the C++ API. The lookup table L keeps
// the document encoding: entry L(j, i) is 0 when hyperplane i is inactive for
// region j, otherwise sign * (target region + 1), and a target equal to j
// itself marks a hard wall.

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ehmc/linalg.hpp"

namespace ehmc {

// Raised when the document is not well-formed structured text at all.
struct DocumentParseError : Error {
  using Error::Error;
};

struct InitialPoint {
  int region = 0;
  Vec x;
};

struct ModelSpec {
  int n = 0;  // ambient dimension
  int d = 0;  // constraint codimension
  int num_regions = 0;
  int num_hyperplanes = 0;
  bool mean_flag = false;  // r[j] holds a mean rather than a linear coefficient

  std::vector<Mat> M;
  std::vector<Vec> r;
  std::vector<double> k;
  std::vector<Mat> A;
  std::vector<Vec> y;

  Mat F;  // num_hyperplanes x n, rows are normals
  Vec g;
  Eigen::MatrixXi L;  // num_regions x num_hyperplanes

  std::optional<InitialPoint> init;

  // Linear coefficient of region j regardless of mean_flag.
  [[nodiscard]] Vec linear_term(int j) const { return mean_flag ? Vec(M[j] * r[j]) : r[j]; }
};

// Active constraints of one region, sign-adjusted so that the interior
// satisfies normals * x + offsets >= 0.
struct RegionBoundary {
  Mat normals;               // m_j x n
  Vec offsets;               // m_j
  std::vector<int> targets;  // 0-based region across each face (== owner for walls)
  std::vector<int> hyperplanes;  // original hyperplane row

  [[nodiscard]] int size() const { return static_cast<int>(targets.size()); }
};

namespace detail {

inline void check_region_index(const ModelSpec& spec, int j) {
  if (j < 0 || j >= spec.num_regions) {
    throw std::out_of_range("region index " + std::to_string(j) + " outside [0, " +
                            std::to_string(spec.num_regions) + ")");
  }
}

inline double finite_number(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number()) throw ModelError("field '" + field + "': expected a number");
  const double value = v.get<double>();
  if (!std::isfinite(value)) throw ModelError("field '" + field + "': non-finite value");
  return value;
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ModelError("missing field '" + where + key + "'");
  }
  return obj.at(key);
}

inline Vec read_vector(const nlohmann::json& v, Eigen::Index size, const std::string& field) {
  if (!v.is_array()) throw ModelError("field '" + field + "': expected an array");
  if (static_cast<Eigen::Index>(v.size()) != size) {
    throw ModelError("field '" + field + "': dimension mismatch, expected length " +
                     std::to_string(size) + ", got " + std::to_string(v.size()));
  }
  Vec out(size);
  for (Eigen::Index i = 0; i < size; ++i) out[i] = finite_number(v[i], field);
  return out;
}

inline Mat read_matrix(const nlohmann::json& v, Eigen::Index rows, Eigen::Index cols,
                       const std::string& field) {
  if (!v.is_array()) throw ModelError("field '" + field + "': expected a nested array");
  if (static_cast<Eigen::Index>(v.size()) != rows) {
    throw ModelError("field '" + field + "': dimension mismatch, expected " +
                     std::to_string(rows) + " rows, got " + std::to_string(v.size()));
  }
  Mat out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = v[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ModelError("field '" + field + "': dimension mismatch in row " + std::to_string(i) +
                       ", expected " + std::to_string(cols) + " columns");
    }
    for (Eigen::Index c = 0; c < cols; ++c) out(i, c) = finite_number(row[c], field);
  }
  return out;
}

inline int positive_int(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ModelError("field '" + field + "': expected an integer");
  const auto value = v.get<long long>();
  if (value <= 0) throw ModelError("field '" + field + "': must be positive");
  return static_cast<int>(value);
}

inline nlohmann::json matrix_json(const Mat& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline nlohmann::json vector_json(const Vec& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace detail

// Parses a model document (JSON). Matrices are row-major nested arrays; M is
// symmetrized on load. Throws DocumentParseError for unparseable text and
// ModelError for schema violations.
inline ModelSpec load_model(const std::string& text) {
  using detail::read_matrix;
  using detail::read_vector;
  using detail::require;

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DocumentParseError(std::string("model document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ModelError("model document must be an object");

  ModelSpec spec;
  spec.n = detail::positive_int(require(doc, "n", ""), "n");
  spec.d = detail::positive_int(require(doc, "d", ""), "d");
  spec.num_regions = detail::positive_int(require(doc, "J", ""), "J");
  spec.num_hyperplanes = detail::positive_int(require(doc, "m", ""), "m");
  if (spec.d >= spec.n) {
    throw ModelError("field 'd': codimension must be smaller than n (d=" +
                     std::to_string(spec.d) + ", n=" + std::to_string(spec.n) + ")");
  }
  if (doc.contains("mean")) {
    if (!doc["mean"].is_boolean()) throw ModelError("field 'mean': expected a boolean");
    spec.mean_flag = doc["mean"].get<bool>();
  }

  const auto& regions = require(doc, "regions", "");
  if (!regions.is_array() || static_cast<int>(regions.size()) != spec.num_regions) {
    throw ModelError("field 'regions': dimension mismatch, expected " +
                     std::to_string(spec.num_regions) + " entries");
  }
  spec.L.resize(spec.num_regions, spec.num_hyperplanes);
  for (int j = 0; j < spec.num_regions; ++j) {
    const auto& reg = regions[j];
    const std::string where = "regions[" + std::to_string(j) + "].";
    spec.M.push_back(symmetrize(read_matrix(require(reg, "M", where), spec.n, spec.n, where + "M")));
    spec.r.push_back(read_vector(require(reg, "r", where), spec.n, where + "r"));
    spec.k.push_back(detail::finite_number(require(reg, "k", where), where + "k"));
    spec.A.push_back(read_matrix(require(reg, "A", where), spec.n, spec.d, where + "A"));
    spec.y.push_back(read_vector(require(reg, "y", where), spec.d, where + "y"));
    const auto& row = require(reg, "L_row", where);
    if (!row.is_array() || static_cast<int>(row.size()) != spec.num_hyperplanes) {
      throw ModelError("field '" + where + "L_row': dimension mismatch, expected length " +
                       std::to_string(spec.num_hyperplanes));
    }
    for (int i = 0; i < spec.num_hyperplanes; ++i) {
      if (!row[i].is_number_integer()) {
        throw ModelError("field '" + where + "L_row': expected integers");
      }
      const auto code = row[i].get<long long>();
      if (std::llabs(code) > spec.num_regions) {
        throw ModelError("field '" + where + "L_row': entry " + std::to_string(code) +
                         " outside [-J, J]");
      }
      spec.L(j, i) = static_cast<int>(code);
    }
  }

  const auto& hyper = require(doc, "hyperplanes", "");
  spec.F = read_matrix(require(hyper, "F", "hyperplanes."), spec.num_hyperplanes, spec.n,
                       "hyperplanes.F");
  spec.g = read_vector(require(hyper, "g", "hyperplanes."), spec.num_hyperplanes, "hyperplanes.g");

  if (doc.contains("init")) {
    const auto& init = doc["init"];
    InitialPoint ip;
    const int code = detail::positive_int(require(init, "region", "init."), "init.region");
    if (code > spec.num_regions) throw ModelError("field 'init.region': exceeds J");
    ip.region = code - 1;
    ip.x = read_vector(require(init, "x", "init."), spec.n, "init.x");
    spec.init = std::move(ip);
  }
  return spec;
}

inline ModelSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

inline nlohmann::json model_to_json(const ModelSpec& spec) {
  nlohmann::json doc;
  doc["n"] = spec.n;
  doc["d"] = spec.d;
  doc["J"] = spec.num_regions;
  doc["m"] = spec.num_hyperplanes;
  doc["mean"] = spec.mean_flag;
  auto regions = nlohmann::json::array();
  for (int j = 0; j < spec.num_regions; ++j) {
    nlohmann::json reg;
    reg["M"] = detail::matrix_json(spec.M[j]);
    reg["r"] = detail::vector_json(spec.r[j]);
    reg["k"] = spec.k[j];
    reg["A"] = detail::matrix_json(spec.A[j]);
    reg["y"] = detail::vector_json(spec.y[j]);
    auto row = nlohmann::json::array();
    for (int i = 0; i < spec.num_hyperplanes; ++i) row.push_back(spec.L(j, i));
    reg["L_row"] = std::move(row);
    regions.push_back(std::move(reg));
  }
  doc["regions"] = std::move(regions);
  doc["hyperplanes"] = {{"F", detail::matrix_json(spec.F)}, {"g", detail::vector_json(spec.g)}};
  if (spec.init) {
    doc["init"] = {{"region", spec.init->region + 1}, {"x", detail::vector_json(spec.init->x)}};
  }
  return doc;
}

// V_j(x) = 1/2 x'M_j x - r_j'x + k_j. Does not check that x lies in region j.
inline double potential(const ModelSpec& spec, int j, const Vec& x) {
  detail::check_region_index(spec, j);
  return 0.5 * x.dot(spec.M[j] * x) - spec.linear_term(j).dot(x) + spec.k[j];
}

// Affine residual A_j'x + y_j of region j's constraint piece.
inline Vec ell(const ModelSpec& spec, int j, const Vec& x) {
  detail::check_region_index(spec, j);
  return spec.A[j].transpose() * x + spec.y[j];
}

inline RegionBoundary region_boundaries(const ModelSpec& spec, int j) {
  detail::check_region_index(spec, j);
  RegionBoundary rb;
  std::vector<int> active;
  for (int i = 0; i < spec.num_hyperplanes; ++i) {
    if (spec.L(j, i) != 0) active.push_back(i);
  }
  rb.normals.resize(static_cast<Eigen::Index>(active.size()), spec.n);
  rb.offsets.resize(static_cast<Eigen::Index>(active.size()));
  for (std::size_t row = 0; row < active.size(); ++row) {
    const int i = active[row];
    const int code = spec.L(j, i);
    const double sign = code > 0 ? 1.0 : -1.0;
    rb.normals.row(static_cast<Eigen::Index>(row)) = sign * spec.F.row(i);
    rb.offsets[static_cast<Eigen::Index>(row)] = sign * spec.g[i];
    rb.targets.push_back(std::abs(code) - 1);
    rb.hyperplanes.push_back(i);
  }
  return rb;
}

// Regions whose sign-adjusted constraints all hold at x to within tol.
inline std::vector<int> region_membership(const ModelSpec& spec, const Vec& x, double tol = 1e-9) {
  std::vector<int> out;
  const Vec plane = spec.F * x + spec.g;
  for (int j = 0; j < spec.num_regions; ++j) {
    bool inside = true;
    for (int i = 0; i < spec.num_hyperplanes && inside; ++i) {
      const int code = spec.L(j, i);
      if (code != 0 && (code > 0 ? plane[i] : -plane[i]) < -tol) inside = false;
    }
    if (inside) out.push_back(j);
  }
  return out;
}

}  // namespace ehmc
