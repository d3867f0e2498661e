#include "codimctl/codim_analysis.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "codimctl/errors.hpp"

namespace codimctl {

double SpectrumReport::optimal_constant() const {
  const Eigen::Index retained = eigs.size() - defect_count;
  if (retained <= 0) return std::numeric_limits<double>::infinity();
  const double floor = eigs(retained - 1);
  return floor > 0.0 ? 1.0 / std::sqrt(floor) : std::numeric_limits<double>::infinity();
}

SpectrumReport spectrum(const Eigen::MatrixXd& G, double tau, int N) {
  require(G.rows() == G.cols() && G.rows() >= 1, "spectrum: matrix must be square and nonempty");
  require(tau > 0.0 && std::isfinite(tau), "spectrum: tau must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G);
  if (solver.info() != Eigen::Success) throw NumericalError("spectrum: eigensolver did not converge");

  // Eigen returns ascending order; reverse to descending.
  const Eigen::Index dim = G.rows();
  SpectrumReport report;
  report.N = N;
  report.tau = tau;
  report.eigs = solver.eigenvalues().reverse();
  if (report.eigs(dim - 1) < -1e-10 * std::max(report.eigs(0), 0.0)) {
    throw NumericalError("spectrum: matrix is not positive semidefinite",
                         {{"min_eigenvalue", report.eigs(dim - 1)}, {"max_eigenvalue", report.eigs(0)}});
  }
  int count = 0;
  for (Eigen::Index j = 0; j < dim; ++j) count += report.eigs(j) < tau ? 1 : 0;
  report.defect_count = count;
  report.defect_basis = solver.eigenvectors().leftCols(count);
  return report;
}

SpectrumReport spectrum(const GramianMatrix& G, double tau) { return spectrum(G.entries, tau, G.N); }

std::string TauRule::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (absolute) {
    os << "absolute tau = " << *absolute;
  } else {
    os << "tau = " << relative << " * largest eigenvalue at smallest truncation, frozen across ladder";
  }
  return os.str();
}

double TauRule::resolve(double reference_eigenvalue) const {
  const double tau = absolute ? *absolute : relative * reference_eigenvalue;
  require(tau > 0.0 && std::isfinite(tau), "tau rule resolved to a non-positive threshold");
  return tau;
}

std::string LadderVerdict::verdict_string() const {
  switch (verdict) {
    case VerdictKind::FiniteCodim:
      return "FiniteCodim(" + std::to_string(codim) + ")";
    case VerdictKind::NotFiniteCodim:
      return "NotFiniteCodim";
    case VerdictKind::Inconclusive:
      break;
  }
  return "Inconclusive";
}

LadderVerdict classify_ladder(std::vector<int> Ns, std::vector<int> counts) {
  require(Ns.size() == counts.size(), "classify_ladder: size mismatch");
  LadderVerdict v;
  v.Ns = std::move(Ns);
  v.counts = std::move(counts);
  const std::size_t levels = v.counts.size();
  if (levels < 3) return v;
  const std::size_t top = std::max<std::size_t>(2, (levels + 1) / 2);
  const std::size_t start = levels - top;
  bool all_equal = true;
  bool increasing = true;
  for (std::size_t j = start + 1; j < levels; ++j) {
    all_equal = all_equal && v.counts[j] == v.counts[start];
    increasing = increasing && v.counts[j] > v.counts[j - 1];
  }
  if (all_equal) {
    v.verdict = VerdictKind::FiniteCodim;
    v.codim = v.counts[start];
  } else if (increasing) {
    v.verdict = VerdictKind::NotFiniteCodim;
  }
  return v;
}

LadderVerdict ladder_scan(SystemKind kind, double T, const ControlRegion& region, double c, const std::vector<int>& Ns,
                          const TauRule& tau_rule) {
  require(Ns.size() >= 3, "ladder_scan: need at least three truncations");
  for (std::size_t j = 0; j < Ns.size(); ++j) {
    require(Ns[j] >= 1, "ladder_scan: truncations must be positive");
    require(j == 0 || Ns[j] > Ns[j - 1], "ladder_scan: truncations must be strictly increasing");
  }
  require(T > 0.0, "ladder_scan: horizon must be positive");

  std::vector<GramianMatrix> gramians;
  gramians.reserve(Ns.size());
  for (int N : Ns) {
    gramians.push_back(assemble_gramian(kind, N, T, region, c));
    check_gramian_invariants(gramians.back());
  }
  const double reference =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gramians.front().entries, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  const double tau = tau_rule.resolve(reference);

  std::vector<SpectrumReport> levels;
  std::vector<int> counts;
  for (const auto& G : gramians) {
    levels.push_back(spectrum(G, tau));
    counts.push_back(levels.back().defect_count);
  }
  LadderVerdict verdict = classify_ladder(Ns, counts);
  verdict.tau_rule = tau_rule.describe();
  verdict.tau = tau;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    verdict.min_eigs.push_back(levels[j].eigs(levels[j].eigs.size() - 1));
    if (j > 0) {
      const Eigen::MatrixXd lifted = embed_coordinates(kind, levels[j - 1].defect_basis, Ns[j - 1], Ns[j]);
      verdict.defect_angles.push_back(max_principal_angle(lifted, levels[j].defect_basis));
    }
  }
  verdict.levels = std::move(levels);
  return verdict;
}

namespace {

struct SortedEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // matching columns
};

SortedEigen ascending_eigen(const Eigen::MatrixXd& G) {
  require(G.rows() == G.cols() && G.rows() >= 1, "subspace test: matrix must be square and nonempty");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G);
  if (solver.info() != Eigen::Success) throw NumericalError("subspace test: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace

SubspaceTestResult observability_subspace_test(const Eigen::MatrixXd& G, int k, double C) {
  require(k >= 0 && k < G.rows(), "observability_subspace_test: need 0 <= k < dimension");
  require(C > 0.0, "observability_subspace_test: C must be positive");
  const SortedEigen e = ascending_eigen(G);
  SubspaceTestResult result;
  result.retained_min = e.values(k);
  result.holds = C * C * e.values(k) >= 1.0;
  if (!result.holds) result.witness = e.vectors.col(k);
  return result;
}

bool compact_perturbation_test(const Eigen::MatrixXd& G, int k, double C) {
  require(k >= 0 && k <= G.rows(), "compact_perturbation_test: need 0 <= k <= dimension");
  require(C > 0.0, "compact_perturbation_test: C must be positive");
  const SortedEigen e = ascending_eigen(G);
  const Eigen::MatrixXd Q = e.vectors.leftCols(k);
  // C^2 (G + P_k) - I >= 0 is lambda_min(G + P_k) >= 1/C^2; the allowance is the eigensolver's
  // backward error on G + P_k.
  const Eigen::MatrixXd M = G + Q * Q.transpose();
  const double lowest =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  const double scale = e.values.cwiseAbs().maxCoeff() + 1.0;
  const double allowance = 64.0 * static_cast<double>(G.rows()) * std::numeric_limits<double>::epsilon() * scale;
  return lowest >= 1.0 / (C * C) - allowance;
}

double compact_constant_from_subspace(const Eigen::MatrixXd& G, int k, double C) {
  require(k >= 0 && k < G.rows(), "compact_constant_from_subspace: need 0 <= k < dimension");
  if (k == 0) return C;
  const SortedEigen e = ascending_eigen(G);
  const double defect_min = std::max(0.0, e.values(0));
  return std::sqrt(std::max(C * C, 1.0 / (1.0 + defect_min)));
}

double max_principal_angle(const Eigen::MatrixXd& Q1, const Eigen::MatrixXd& Q2) {
  require(Q1.rows() == Q2.rows(), "max_principal_angle: row mismatch");
  if (Q1.cols() == 0 || Q2.cols() == 0) return 0.0;
  const Eigen::MatrixXd& small = Q1.cols() <= Q2.cols() ? Q1 : Q2;
  const Eigen::MatrixXd& big = Q1.cols() <= Q2.cols() ? Q2 : Q1;
  const Eigen::MatrixXd residual = small - big * (big.transpose() * small);
  const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(residual).singularValues()(0);
  return std::asin(std::min(1.0, s));
}

Eigen::MatrixXd embed_coordinates(SystemKind kind, const Eigen::MatrixXd& basis, int from, int to) {
  require(from <= to, "embed_coordinates: target truncation must not be smaller");
  if (kind == SystemKind::Heat) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(to, basis.cols());
    out.topRows(from) = basis;
    return out;
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * to, basis.cols());
  out.topRows(from) = basis.topRows(from);
  out.middleRows(to, from) = basis.bottomRows(from);
  return out;
}

}  // namespace codimctl
