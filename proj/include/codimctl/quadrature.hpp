#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include <Eigen/Dense>

#include "codimctl/errors.hpp"

namespace codimctl {

/// Gauss–Legendre rule on [-1, 1].
template <typename Scalar>
struct GaussLegendreRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
};

/// Nodes and weights from the Golub–Welsch eigenproblem of the Legendre Jacobi matrix.
template <typename Scalar = double>
GaussLegendreRule<Scalar> gauss_legendre(int order) {
  require(order >= 1, "gauss_legendre: order must be >= 1");
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix jacobi = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const Scalar beta = Scalar(k) / std::sqrt(Scalar(4) * k * k - Scalar(1));
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  GaussLegendreRule<Scalar> rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = Scalar(2) * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

/// Composite Gauss–Legendre on [lo, hi] with `panels` equal panels. `Value` may be a scalar or an
/// Eigen object; the integrand's return type must support `+=` and scalar multiplication.
template <typename Value, typename Scalar, typename Integrand>
Value composite_gauss_legendre(const Integrand& f, Scalar lo, Scalar hi, int panels,
                               const GaussLegendreRule<Scalar>& rule, Value zero) {
  const Scalar width = (hi - lo) / Scalar(panels);
  Value total = zero;
  for (int p = 0; p < panels; ++p) {
    const Scalar mid = lo + (Scalar(p) + Scalar(0.5)) * width;
    for (Eigen::Index q = 0; q < rule.nodes.size(); ++q) {
      const Scalar x = mid + Scalar(0.5) * width * rule.nodes(q);
      total += (Scalar(0.5) * width * rule.weights(q)) * f(x);
    }
  }
  return total;
}

/// Scalar adaptive integration by panel doubling; stops when successive estimates differ by
/// less than `tol` (absolute). Throws NumericalError after `max_panels`.
template <typename Integrand>
double integrate_by_panel_doubling(const Integrand& f, double lo, double hi, double tol = 1e-12,
                                   int start_panels = 4, int max_panels = 1 << 16) {
  static const GaussLegendreRule<double> rule = gauss_legendre<double>(16);
  int panels = start_panels;
  double previous = composite_gauss_legendre<double>(f, lo, hi, panels, rule, 0.0);
  while (panels < max_panels) {
    panels *= 2;
    const double current = composite_gauss_legendre<double>(f, lo, hi, panels, rule, 0.0);
    if (std::abs(current - previous) < tol) return current;
    previous = current;
  }
  throw NumericalError("integrate_by_panel_doubling: no convergence");
}

/// Composite Simpson weights for K+1 equispaced samples with step dt (K even).
inline Eigen::VectorXd simpson_weights(int intervals, double dt) {
  require(intervals >= 2 && intervals % 2 == 0, "simpson_weights: interval count must be even and >= 2");
  Eigen::VectorXd w(intervals + 1);
  for (int k = 0; k <= intervals; ++k) w(k) = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
  return w * (dt / 3.0);
}

}  // namespace codimctl
