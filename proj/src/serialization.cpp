#include "codimctl/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "codimctl/errors.hpp"

namespace codimctl::io {

namespace {

void write_string(std::string& out, const std::string& s) {
  // nlohmann handles escaping; reuse it for a lone string.
  out += Json(s).dump();
}

void write_double(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  out += s;
}

void write(std::string& out, const Json& v, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write_string(out, it.key());
        out += ": ";
        write(out, it.value(), depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : v) flat = flat && !e.is_structured();
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          write(out, v[i], depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write(out, v[i], depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      write_double(out, v.get<double>());
      return;
    default:
      out += v.dump();
  }
}

std::string csv_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json endpoint_json(const EndpointReport& e) {
  return Json{{"absolute_error", e.absolute_error}, {"relative_error", e.relative_error},
              {"target_norm", e.target_norm}};
}

}  // namespace

std::string dump(const Json& value) {
  std::string out;
  write(out, value, 0);
  out += "\n";
  return out;
}

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Eigen::MatrixXd& M) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) out.push_back(to_json(Eigen::VectorXd(M.row(i).transpose())));
  return out;
}

Eigen::MatrixXd matrix_from_json(const Json& rows) {
  require(rows.is_array() && !rows.empty(), "matrix JSON: expected a non-empty array of rows");
  const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
  require(cols > 0, "matrix JSON: rows must be non-empty arrays");
  Eigen::MatrixXd M(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].is_array() && rows[i].size() == cols, "matrix JSON: ragged rows");
    for (std::size_t j = 0; j < cols; ++j) {
      require(rows[i][j].is_number(), "matrix JSON: non-numeric entry");
      M(i, j) = rows[i][j].get<double>();
    }
  }
  return M;
}

Json to_json(const GramianMatrix& G) {
  Json entries = Json::array();
  for (Eigen::Index i = 0; i < G.entries.rows(); ++i)
    for (Eigen::Index j = 0; j < G.entries.cols(); ++j) entries.push_back(G.entries(i, j));
  return Json{{"kind", to_string(G.kind)},
              {"N", G.N},
              {"T", G.T},
              {"region", {G.region.a, G.region.b}},
              {"potential", G.potential},
              {"dim", G.entries.rows()},
              {"entries", std::move(entries)}};
}

GramianMatrix gramian_from_json(const Json& j) {
  GramianMatrix G;
  G.kind = system_kind_from_string(j.at("kind").get<std::string>());
  G.N = j.at("N").get<int>();
  G.T = j.at("T").get<double>();
  G.region = ControlRegion(j.at("region").at(0).get<double>(), j.at("region").at(1).get<double>());
  G.potential = j.at("potential").get<double>();
  const int dim = G.kind == SystemKind::Wave ? 2 * G.N : G.N;
  const Json& e = j.at("entries");
  require(e.size() == static_cast<std::size_t>(dim) * dim, "gramian JSON: entry count does not match N");
  G.entries.resize(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) G.entries(r, c) = e[r * dim + c].get<double>();
  return G;
}

Json to_json(const SpectrumReport& s) {
  return Json{{"N", s.N}, {"tau", s.tau}, {"eigs", to_json(s.eigs)}, {"defect_count", s.defect_count}};
}

Json to_json(const LadderVerdict& v) {
  Json levels = Json::array();
  for (const auto& s : v.levels) levels.push_back(to_json(s));
  return Json{{"Ns", v.Ns},
              {"counts", v.counts},
              {"verdict", v.verdict_string()},
              {"codim", v.codim},
              {"tau_rule", v.tau_rule},
              {"tau", v.tau},
              {"min_eigs", v.min_eigs},
              {"defect_angles", v.defect_angles},
              {"levels", std::move(levels)}};
}

std::string eigenvalue_csv(const LadderVerdict& v) {
  std::ostringstream os;
  os << "N,j,eig\n";
  for (const auto& s : v.levels)
    for (Eigen::Index j = 0; j < s.eigs.size(); ++j) os << s.N << ',' << j + 1 << ',' << csv_double(s.eigs(j)) << '\n';
  return os.str();
}

Json to_json(const SampledControl& u) {
  return Json{{"dt", u.dt}, {"rows", u.values.rows()}, {"cols", u.values.cols()}, {"values", to_json(u.values)}};
}

std::string control_csv(const SampledControl& u) {
  std::ostringstream os;
  os << "t,norm\n";
  for (Eigen::Index k = 0; k < u.values.cols(); ++k)
    os << csv_double(k * u.dt) << ',' << csv_double(u.values.col(k).norm()) << '\n';
  return os.str();
}

Json to_json(const HumSolution& s, const SampledControl& sampled) {
  return Json{{"kind", to_string(s.kind)},
              {"eps", s.eps},
              {"cg_iters", s.cg_iters},
              {"residual", s.residual},
              {"control_norm", s.control_norm},
              {"endpoint", endpoint_json(s.endpoint)},
              {"adjoint_datum", to_json(s.adjoint_datum)},
              {"predicted_endpoint", to_json(s.predicted_endpoint)},
              {"simulated_endpoint", to_json(s.simulated_endpoint)},
              {"control", to_json(sampled)}};
}

Json to_json(const LqSolution& s) {
  return Json{{"kind", to_string(s.kind)},
              {"cost", s.cost},
              {"kkt_residual", s.kkt_residual},
              {"multiplier_norm", s.multiplier.norm()},
              {"radius", s.radius},
              {"regularization", s.regularization},
              {"control_norm", s.control_norm},
              {"endpoint_error", endpoint_json(s.endpoint_error)},
              {"multiplier", to_json(s.multiplier)},
              {"endpoint", to_json(s.endpoint)},
              {"control", to_json(s.control)}};
}

Json to_json(const EquivalenceReport& r) {
  return Json{{"n", r.n},
              {"kalman_rank", r.kalman_rank},
              {"gramian_rank", r.gramian_rank},
              {"codim", r.codim},
              {"exactly_controllable", r.exactly_controllable},
              {"observability_floor", r.observability_floor},
              {"subspace_agreement", r.subspace_agreement},
              {"subspace_constant", r.subspace_constant},
              {"compact_constant", r.compact_constant},
              {"subspace_estimate_holds", r.subspace_estimate_holds},
              {"compact_estimate_holds", r.compact_estimate_holds},
              {"compact_implies_subspace", r.compact_implies_subspace},
              {"inconclusive", r.inconclusive}};
}

Json to_json(const LtiSystem& sys) {
  return Json{{"A", to_json(sys.A)}, {"B", to_json(sys.B)}, {"T", sys.T}};
}

LtiSystem system_from_json(const Json& j) {
  require(j.is_object() && j.contains("A") && j.contains("B"), "system JSON: expected keys A and B");
  LtiSystem sys;
  sys.A = matrix_from_json(j.at("A"));
  sys.B = matrix_from_json(j.at("B"));
  if (j.contains("T")) sys.T = j.at("T").get<double>();
  sys.validate();
  return sys;
}

Json envelope(const std::string& command, const Json& config, Json result) {
  return Json{{"schema", kSchemaVersion}, {"command", command}, {"config", config}, {"result", std::move(result)}};
}

}  // namespace codimctl::io
