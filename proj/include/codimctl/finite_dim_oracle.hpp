#pragma once

// Exact checks on finite-dimensional systems y' = A y + B u, where the reachable set from zero is
// the range of the controllability Gramian and of the Kalman matrix [B, AB, ..., A^{n-1}B].
// Every observability statement reduces to a rank or eigenvalue statement here, so these
// routines serve as ground truth for the spectral diagnostics.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace codimctl {

struct LtiSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  double T = 1.0;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  /// Throws ValidationError on shape or finiteness violations.
  void validate() const;
};

/// Numerical rank with the tolerance rows * sigma_max * eps * 64. A singular value within a
/// factor 10 of the tolerance marks the rank as ambiguous.
struct RankInfo {
  int rank = 0;
  bool ambiguous = false;
  double tolerance = 0.0;
  Eigen::VectorXd values;       ///< singular values (or eigenvalues), descending
  Eigen::MatrixXd range_basis;  ///< orthonormal basis of the numerical range
};

Eigen::MatrixXd kalman_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
RankInfo kalman_analysis(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
int kalman_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// \int_0^T e^{As} B B^T e^{A^T s} ds by composite Gauss–Legendre (order 16) on panels doubled
/// until successive results agree to 1e-13 relative. Requires |A|_1 T <= 50.
Eigen::MatrixXd fd_gramian(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double T);

/// Rank of a symmetric PSD matrix from its eigenvalues, same tolerance rule as RankInfo.
RankInfo psd_rank(const Eigen::MatrixXd& G);

struct EquivalenceReport {
  int n = 0;
  int kalman_rank = 0;
  int gramian_rank = 0;
  int codim = 0;
  bool exactly_controllable = false;
  /// Smallest Gramian eigenvalue above the rank tolerance (0 when the rank is 0).
  double observability_floor = 0.0;
  /// Largest principal angle between Kalman range and Gramian range, radians.
  double subspace_agreement = 0.0;
  /// Constant of the restricted observability estimate on the Gramian range.
  double subspace_constant = 0.0;
  /// Constant of the compact-perturbation estimate with the kernel projector.
  double compact_constant = 0.0;
  bool subspace_estimate_holds = false;
  bool compact_estimate_holds = false;
  /// The compact-perturbation constant also satisfies the restricted estimate.
  bool compact_implies_subspace = false;
  bool inconclusive = false;

  /// All invariants: ranks agree, codim = n - rank, angle <= tol, both estimates hold.
  bool consistent(double angle_tol) const;
};

/// Builds the report; `tol` bounds the principal angle accepted as range agreement.
EquivalenceReport check_equivalences(const LtiSystem& system, double tol = 1e-6);

/// Seeded random systems with entries uniform in [-1, 1]. Every third instance is built with a
/// planted uncontrollable subspace (block upper-triangular pair rotated by a random orthogonal
/// matrix), so rank-deficient cases are exercised.
std::vector<LtiSystem> random_systems(int n, int m, int count, std::uint64_t seed, std::vector<double> horizons = {});

}  // namespace codimctl
