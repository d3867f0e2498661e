#pragma once

// JSON and CSV export. JSON is the canonical format: keys keep insertion order and floating-point
// values are written with 17 significant digits, so identical inputs give byte-identical files.
// CSV output is for plotting only.

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "codimctl/codim_analysis.hpp"
#include "codimctl/control_synthesis.hpp"
#include "codimctl/finite_dim_oracle.hpp"
#include "codimctl/gramian.hpp"

namespace codimctl::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "codimctl/1";

/// Two-space indented JSON with %.17g doubles and a trailing newline. Non-finite doubles become null.
std::string dump(const Json& value);

Json to_json(const Eigen::VectorXd& v);
/// Array of rows.
Json to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_json(const Json& rows);

/// {kind, N, T, region: [a, b], potential, entries: row-major flat array}
Json to_json(const GramianMatrix& G);
GramianMatrix gramian_from_json(const Json& j);

/// {N, tau, eigs, defect_count}
Json to_json(const SpectrumReport& s);
/// {Ns, counts, verdict, tau_rule, tau, codim, min_eigs, defect_angles}
Json to_json(const LadderVerdict& v);
/// Rows "N,j,eig" over every level, j starting at 1.
std::string eigenvalue_csv(const LadderVerdict& v);

/// {dt, rows, cols, values}: rows index the control frame, cols index time.
Json to_json(const SampledControl& u);
/// Rows "t,norm" with the pointwise L^2(omega) norm of the control.
std::string control_csv(const SampledControl& u);

/// `sampled` is the modal control evaluated on the export grid.
Json to_json(const HumSolution& s, const SampledControl& sampled);
Json to_json(const LqSolution& s);

Json to_json(const EquivalenceReport& r);
/// {"A": rows, "B": rows, "T": value}; T optional on input (default 1).
Json to_json(const LtiSystem& sys);
LtiSystem system_from_json(const Json& j);

/// {schema, command, config, result}
Json envelope(const std::string& command, const Json& config, Json result);

}  // namespace codimctl::io
