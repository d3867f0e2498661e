#pragma once

// Spectral diagnostics for finite codimensionality of the reachable set.
//
// A truncated Gramian whose eigenvalues stay above a fixed threshold tau outside a defect space of
// bounded dimension gives an observability estimate |v|^2 <= C^2 v^T G v with C = 1/sqrt(tau) on the
// complement of that space. Tracking the defect dimension along a ladder of truncations separates
// systems whose reachable set has finite codimension (defect dimension stabilizes) from those
// where it does not (defect dimension keeps growing). The ladder verdict is a numerical
// diagnostic, not a certificate.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "codimctl/gramian.hpp"

namespace codimctl {

struct SpectrumReport {
  int N = 0;
  double tau = 0.0;
  Eigen::VectorXd eigs;          ///< descending
  int defect_count = 0;          ///< #{j : eigs_j < tau}
  Eigen::MatrixXd defect_basis;  ///< orthonormal eigenvectors of the defect eigenvalues, columns

  /// Best constant on the complement of the defect space: 1/sqrt(smallest retained eigenvalue).
  /// Infinite when nothing is retained.
  double optimal_constant() const;
};

/// Symmetric eigendecomposition; throws NumericalError if the eigensolver fails or the
/// eigenvalues violate the PSD floor.
SpectrumReport spectrum(const GramianMatrix& G, double tau);
SpectrumReport spectrum(const Eigen::MatrixXd& G, double tau, int N = 0);

/// Threshold rule: tau = relative * (largest eigenvalue at the smallest ladder truncation), or a
/// fixed absolute value when `absolute` is set.
struct TauRule {
  double relative = 1e-8;
  std::optional<double> absolute;

  std::string describe() const;
  double resolve(double reference_eigenvalue) const;
};

enum class VerdictKind { FiniteCodim, NotFiniteCodim, Inconclusive };

struct LadderVerdict {
  std::vector<int> Ns;
  std::vector<int> counts;
  VerdictKind verdict = VerdictKind::Inconclusive;
  int codim = -1;  ///< stable defect count when verdict is FiniteCodim
  std::string tau_rule;
  double tau = 0.0;
  /// Smallest Gramian eigenvalue per level.
  std::vector<double> min_eigs;
  /// Largest principal angle between defect spaces of consecutive levels (report only).
  std::vector<double> defect_angles;
  /// Per-level spectra, kept for CSV export.
  std::vector<SpectrumReport> levels;

  std::string verdict_string() const;
};

/// Classification over the top half of the counts: all equal -> FiniteCodim(k), strictly
/// increasing -> NotFiniteCodim, else Inconclusive. Fewer than three levels -> Inconclusive.
LadderVerdict classify_ladder(std::vector<int> Ns, std::vector<int> counts);

LadderVerdict ladder_scan(SystemKind kind, double T, const ControlRegion& region, double c, const std::vector<int>& Ns,
                          const TauRule& tau_rule = {});

struct SubspaceTestResult {
  bool holds = false;
  /// Violating unit vector when the estimate fails.
  std::optional<Eigen::VectorXd> witness;
  /// Smallest eigenvalue on the tested complement.
  double retained_min = 0.0;
};

/// |v|^2 <= C^2 v^T G v for all v orthogonal to the bottom-k eigenspace of G.
SubspaceTestResult observability_subspace_test(const Eigen::MatrixXd& G, int k, double C);

/// |v|^2 <= C^2 (v^T G v + |P_k v|^2) for all v, with P_k the projector onto the bottom-k
/// eigenspace of G. Decided by lambda_min(G + P_k) >= 1/C^2 up to a rounding allowance of
/// 64 n eps (|G| + 1).
bool compact_perturbation_test(const Eigen::MatrixXd& G, int k, double C);

/// A constant C' for which compact_perturbation_test(G, k, C') holds whenever
/// observability_subspace_test(G, k, C) does: C'^2 = max(C^2, 1 / (1 + min defect eigenvalue)).
double compact_constant_from_subspace(const Eigen::MatrixXd& G, int k, double C);

/// Largest principal angle between the column spaces of two orthonormal bases of equal row count.
double max_principal_angle(const Eigen::MatrixXd& Q1, const Eigen::MatrixXd& Q2);

/// Embeds vectors in Gramian coordinates of truncation `from` into truncation `to`
/// (heat: pad modes; wave: pad each of the two blocks).
Eigen::MatrixXd embed_coordinates(SystemKind kind, const Eigen::MatrixXd& basis, int from, int to);

}  // namespace codimctl
