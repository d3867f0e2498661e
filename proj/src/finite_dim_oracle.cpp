#include "codimctl/finite_dim_oracle.hpp"

#include <limits>
#include <numbers>
#include <random>

#include "codimctl/codim_analysis.hpp"
#include "codimctl/errors.hpp"
#include "codimctl/expm.hpp"
#include "codimctl/quadrature.hpp"

namespace codimctl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

RankInfo rank_from_values(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors, Eigen::Index rows) {
  RankInfo info;
  info.values = values;
  const double top = values.size() > 0 ? std::max(values(0), 0.0) : 0.0;
  info.tolerance = double(rows) * top * kEps * 64.0;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (values(j) > info.tolerance) ++info.rank;
    // A zero top value means the matrix is exactly zero: no ambiguity.
    if (top > 0.0 && values(j) > info.tolerance / 10.0 && values(j) < info.tolerance * 10.0) info.ambiguous = true;
  }
  info.range_basis = vectors.leftCols(info.rank);
  return info;
}

}  // namespace

void LtiSystem::validate() const {
  require(A.rows() >= 1 && A.rows() == A.cols(), "LtiSystem: A must be square with n >= 1");
  require(B.rows() == A.rows() && B.cols() >= 1, "LtiSystem: B must be n x m with m >= 1");
  require(A.allFinite() && B.allFinite(), "LtiSystem: entries must be finite");
  require(T > 0.0 && std::isfinite(T), "LtiSystem: horizon must be positive");
}

Eigen::MatrixXd kalman_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  require(A.rows() == A.cols() && B.rows() == A.rows(), "kalman_matrix: shape mismatch");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  Eigen::MatrixXd K(n, n * m);
  Eigen::MatrixXd block = B;
  for (Eigen::Index j = 0; j < n; ++j) {
    K.middleCols(j * m, m) = block;
    block = A * block;
  }
  return K;
}

RankInfo kalman_analysis(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::MatrixXd K = kalman_matrix(A, B);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(K, Eigen::ComputeFullU);
  return rank_from_values(svd.singularValues(), svd.matrixU(), K.rows());
}

int kalman_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) { return kalman_analysis(A, B).rank; }

RankInfo psd_rank(const Eigen::MatrixXd& G) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G);
  if (solver.info() != Eigen::Success) throw NumericalError("psd_rank: eigensolver did not converge");
  return rank_from_values(solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse(), G.rows());
}

namespace {

struct GramianQuadrature {
  Eigen::MatrixXd gramian;
  Eigen::MatrixXd factor;  // gramian = factor * factor^T
};

GramianQuadrature gramian_quadrature(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double T) {
  require(T > 0.0 && std::isfinite(T), "fd_gramian: horizon must be positive");
  require(A.rows() == A.cols() && B.rows() == A.rows(), "fd_gramian: shape mismatch");
  require(A.cwiseAbs().colwise().sum().maxCoeff() * T <= kExpmMaxNorm, "fd_gramian: |A|_1 T exceeds 50");
  static const GaussLegendreRule<double> rule = gauss_legendre<double>(16);
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  const Eigen::Index order = rule.nodes.size();

  auto factor_at = [&](int panels) {
    Eigen::MatrixXd L(n, panels * order * m);
    const double width = T / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = (p + 0.5) * width;
      for (Eigen::Index q = 0; q < order; ++q) {
        const double s = mid + 0.5 * width * rule.nodes(q);
        const double w = std::sqrt(0.5 * width * rule.weights(q));
        L.middleCols((p * order + q) * m, m) = w * (expm(A * s) * B);
      }
    }
    return L;
  };

  Eigen::MatrixXd factor = factor_at(4);
  Eigen::MatrixXd previous = factor * factor.transpose();
  for (int panels = 8; panels <= 4096; panels *= 2) {
    factor = factor_at(panels);
    Eigen::MatrixXd current = factor * factor.transpose();
    const double diff = (current - previous).cwiseAbs().maxCoeff();
    if (diff <= 1e-13 * current.cwiseAbs().maxCoeff()) {
      return {0.5 * (current + current.transpose()), std::move(factor)};
    }
    previous = std::move(current);
  }
  throw NumericalError("fd_gramian: quadrature did not converge under panel doubling");
}

}  // namespace

Eigen::MatrixXd fd_gramian(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double T) {
  return gramian_quadrature(A, B, T).gramian;
}

bool EquivalenceReport::consistent(double angle_tol) const {
  return !inconclusive && kalman_rank == gramian_rank && codim == n - kalman_rank &&
         exactly_controllable == (codim == 0) && subspace_agreement <= angle_tol && subspace_estimate_holds &&
         compact_estimate_holds && compact_implies_subspace;
}

EquivalenceReport check_equivalences(const LtiSystem& system, double tol) {
  system.validate();
  require(tol > 0.0, "check_equivalences: tol must be positive");
  const RankInfo kalman = kalman_analysis(system.A, system.B);
  const GramianQuadrature quad = gramian_quadrature(system.A, system.B, system.T);
  // Rank and floor from the square-root factor: its singular values are the square roots of the
  // Gramian eigenvalues, resolved to relative rather than absolute accuracy.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(quad.factor, Eigen::ComputeThinU);
  const RankInfo gram = rank_from_values(svd.singularValues(), svd.matrixU(), quad.factor.rows());
  const Eigen::MatrixXd& G = quad.gramian;

  EquivalenceReport r;
  r.n = system.n();
  r.kalman_rank = kalman.rank;
  r.gramian_rank = gram.rank;
  r.codim = r.n - kalman.rank;
  r.exactly_controllable = r.codim == 0;
  r.inconclusive = kalman.ambiguous || gram.ambiguous;
  r.subspace_agreement = kalman.rank == gram.rank ? max_principal_angle(kalman.range_basis, gram.range_basis)
                                                  : std::numbers::pi / 2;
  if (gram.rank == 0) return r;

  const double sigma = gram.values(gram.rank - 1);
  r.observability_floor = sigma * sigma;
  // Headroom for the absolute rounding of a symmetric eigensolve on G, so C^2 * floor >= 1 holds
  // for the computed eigenvalues as well.
  const double rounding = 64.0 * r.n * kEps * gram.values(0) * gram.values(0);
  r.subspace_constant = std::sqrt((1.0 + 1e-10) / r.observability_floor + rounding / (r.observability_floor * r.observability_floor));
  const int kernel_dim = r.n - gram.rank;
  r.subspace_estimate_holds = observability_subspace_test(G, kernel_dim, r.subspace_constant).holds;
  r.compact_constant = compact_constant_from_subspace(G, kernel_dim, r.subspace_constant);
  r.compact_estimate_holds = compact_perturbation_test(G, kernel_dim, r.compact_constant);
  r.compact_implies_subspace = observability_subspace_test(G, kernel_dim, r.compact_constant).holds;
  return r;
}

std::vector<LtiSystem> random_systems(int n, int m, int count, std::uint64_t seed, std::vector<double> horizons) {
  require(n >= 1 && m >= 1 && count >= 0, "random_systems: need n >= 1, m >= 1, count >= 0");
  if (horizons.empty()) horizons = {0.5, 1.0, 2.0};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = uniform(rng);
    return M;
  };

  std::vector<LtiSystem> systems;
  systems.reserve(count);
  for (int k = 0; k < count; ++k) {
    LtiSystem s;
    s.T = horizons[k % horizons.size()];
    if (k % 3 == 2 && n >= 2) {
      const int r = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
      Eigen::MatrixXd A = draw(n, n);
      A.bottomLeftCorner(n - r, r).setZero();
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, m);
      B.topRows(r) = draw(r, m);
      const Eigen::MatrixXd P = Eigen::HouseholderQR<Eigen::MatrixXd>(draw(n, n)).householderQ();
      s.A = P * A * P.transpose();
      s.B = P * B;
    } else {
      s.A = draw(n, n);
      s.B = draw(n, m);
    }
    systems.push_back(std::move(s));
  }
  return systems;
}

}  // namespace codimctl
