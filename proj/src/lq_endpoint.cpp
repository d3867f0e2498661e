// Endpoint-constrained LQ on a uniform grid.
//
// Unknowns per sample k = 0..K: state x_k and control frame coordinates z_k. The base saddle-point
// system K0 collects the Simpson-weighted cost Hessian, the initial condition and the exact
// quadratic-hold dynamics over each pair of intervals (see QuadraticHoldPair). The endpoint constraint is added by
// a Schur complement on its multiplier mu:
//     x_K = x_free - S mu,  S = P K0^{-1} P^T  (P selects x_K),
// so (S + eps I) mu = x_free - target, with eps = 0 for the exact wave constraint and eps > 0
// tuned to the endpoint radius for the heat relaxation.

#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "codimctl/control_synthesis.hpp"
#include "codimctl/errors.hpp"
#include "codimctl/quadrature.hpp"

namespace codimctl {

int lq_intervals(double T, int steps_per_unit) {
  require(T > 0.0 && std::isfinite(T), "lq: horizon must be positive");
  require(steps_per_unit >= 1, "lq: steps per unit time must be positive");
  int K = std::max(2, static_cast<int>(std::ceil(T * steps_per_unit - 1e-9)));
  if (K % 2) ++K;
  return K;
}

namespace {

struct Layout {
  int s;  // state dimension
  int n;  // control dimension
  int K;  // intervals

  int stage() const { return s + n; }
  int x(int k) const { return k * stage(); }
  int z(int k) const { return k * stage() + s; }
  int primal() const { return (K + 1) * stage(); }
  int initial() const { return primal(); }
  int dynamics(int k) const { return primal() + s + k * s; }
  int total() const { return primal() + s + K * s; }
};

class TripletBuilder {
 public:
  void symmetric(int row, int col, double v) {
    if (v == 0.0) return;
    entries_.emplace_back(row, col, v);
    entries_.emplace_back(col, row, v);
  }
  void diagonal(int idx, double v) {
    if (v != 0.0) entries_.emplace_back(idx, idx, v);
  }
  void block(int row0, int col0, const Eigen::MatrixXd& M, double sign) {
    const double cutoff = 1e-14 * M.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      for (Eigen::Index i = 0; i < M.rows(); ++i)
        if (std::abs(M(i, j)) > cutoff) symmetric(row0 + int(i), col0 + int(j), sign * M(i, j));
  }
  const std::vector<Eigen::Triplet<double>>& entries() const { return entries_; }

 private:
  std::vector<Eigen::Triplet<double>> entries_;
};

struct Problem {
  int control_dim;
  Eigen::VectorXd state_cost;  // diagonal of Q, |y|^2 = x^T Q x
  Eigen::VectorXd x0;
  Eigen::VectorXd target;
  QuadraticHoldPair step;
};

struct Solved {
  SampledControl control;
  Eigen::VectorXd multiplier;
  Eigen::VectorXd endpoint;
  double cost = 0.0;
  double kkt_residual = 0.0;
  double radius = 0.0;
  double regularization = 0.0;
};

// radius < 0 requests the exact constraint.
Solved solve_lq(const Problem& p, double T, const LqOptions& options, double radius) {
  require(options.beta > 0.0 && std::isfinite(options.beta), "lq: beta must be positive");
  require(options.alpha >= 0.0 && std::isfinite(options.alpha), "lq: alpha must be nonnegative");
  const int K = lq_intervals(T, options.steps_per_unit);
  const double dt = T / K;
  require(dt <= kMaxSampleStep, "lq: time step exceeds 0.01");
  const Layout L{static_cast<int>(p.x0.size()), p.control_dim, K};
  const Eigen::VectorXd w = simpson_weights(K, dt);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(L.s, L.s);

  TripletBuilder tb;
  for (int k = 0; k <= K; ++k) {
    for (int i = 0; i < L.s; ++i) tb.diagonal(L.x(k) + i, options.alpha * w(k) * p.state_cost(i));
    for (int i = 0; i < L.n; ++i) tb.diagonal(L.z(k) + i, options.beta * w(k));
  }
  tb.block(L.initial(), L.x(0), I, 1.0);
  for (int k = 0; k < K; k += 2) {
    tb.block(L.dynamics(k), L.x(k + 1), I, 1.0);
    tb.block(L.dynamics(k), L.x(k), p.step.half_transition, -1.0);
    tb.block(L.dynamics(k + 1), L.x(k + 2), I, 1.0);
    tb.block(L.dynamics(k + 1), L.x(k), p.step.full_transition, -1.0);
    for (int i = 0; i < 3; ++i) {
      tb.block(L.dynamics(k), L.z(k + i), p.step.half[i], -1.0);
      tb.block(L.dynamics(k + 1), L.z(k + i), p.step.full[i], -1.0);
    }
  }
  Eigen::SparseMatrix<double> K0(L.total(), L.total());
  K0.setFromTriplets(tb.entries().begin(), tb.entries().end());
  K0.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(K0);
  if (lu.info() != Eigen::Success) throw NumericalError("lq: saddle-point system is singular");

  Eigen::VectorXd rhs0 = Eigen::VectorXd::Zero(L.total());
  rhs0.segment(L.initial(), L.s) = p.x0;
  const Eigen::VectorXd X0 = lu.solve(rhs0);
  Eigen::MatrixXd selector = Eigen::MatrixXd::Zero(L.total(), L.s);
  selector.middleRows(L.x(K), L.s).setIdentity();
  const Eigen::MatrixXd Y = lu.solve(selector);
  Eigen::MatrixXd S = Y.middleRows(L.x(K), L.s);
  S = 0.5 * (S + S.transpose());

  const Eigen::VectorXd deficit = X0.segment(L.x(K), L.s) - p.target;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  const Eigen::VectorXd dq = eig.eigenvectors().transpose() * deficit;
  const double top = std::max(lambda.maxCoeff(), std::numeric_limits<double>::min());

  Solved out;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(L.s);
  double eps = 0.0;
  if (radius < 0.0) {
    if (lambda.minCoeff() <= 1e-12 * top) {
      std::vector<double> lowest(lambda.data(), lambda.data() + std::min<Eigen::Index>(10, lambda.size()));
      throw NumericalError("lq: endpoint system is singular (target direction not reachable)",
                           {{"lowest_eigenvalues", lowest}, {"largest_eigenvalue", top}});
    }
    mu = eig.eigenvectors() * dq.cwiseQuotient(lambda);
  } else if (deficit.norm() > radius) {
    auto residual = [&](double e) { return e * dq.cwiseQuotient((lambda.array() + e).matrix()).norm(); };
    double lo = 1e-14 * top;
    if (residual(lo) > radius) {
      throw NumericalError("lq: endpoint relaxation infeasible",
                           {{"radius", radius}, {"residual_at_min_eps", residual(lo)}, {"min_eps", lo}});
    }
    double hi = top;
    while (residual(hi) < radius) hi *= 10.0;
    for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
      const double mid = std::sqrt(lo * hi);
      (residual(mid) > radius ? hi : lo) = mid;
    }
    eps = lo;
    mu = eig.eigenvectors() * dq.cwiseQuotient((lambda.array() + eps).matrix());
  }
  const Eigen::VectorXd X = X0 - Y * mu;

  // Residual of the full saddle-point system [K0 P^T; P -eps I].
  Eigen::VectorXd r_top = K0 * X - rhs0;
  r_top.segment(L.x(K), L.s) += mu;
  const Eigen::VectorXd r_end = X.segment(L.x(K), L.s) - eps * mu - p.target;
  const double rhs_norm = std::sqrt(rhs0.squaredNorm() + p.target.squaredNorm());
  const double res_norm = std::sqrt(r_top.squaredNorm() + r_end.squaredNorm());
  out.kkt_residual = rhs_norm > 0.0 ? res_norm / rhs_norm : res_norm;

  out.control.dt = dt;
  out.control.values.resize(L.n, K + 1);
  double cost = 0.0;
  for (int k = 0; k <= K; ++k) {
    out.control.values.col(k) = X.segment(L.z(k), L.n);
    const Eigen::VectorXd xk = X.segment(L.x(k), L.s);
    cost += w(k) * (options.alpha * xk.dot(p.state_cost.cwiseProduct(xk)) + options.beta * out.control.values.col(k).squaredNorm());
  }
  out.cost = 0.5 * cost;
  out.multiplier = mu;
  out.endpoint = X.segment(L.x(K), L.s);
  out.radius = std::max(radius, 0.0);
  out.regularization = eps;
  return out;
}

LqSolution package(SystemKind kind, Solved s, const EndpointReport& report) {
  LqSolution sol;
  sol.kind = kind;
  sol.control = std::move(s.control);
  sol.multiplier = std::move(s.multiplier);
  sol.cost = s.cost;
  sol.kkt_residual = s.kkt_residual;
  sol.endpoint = std::move(s.endpoint);
  sol.endpoint_error = report;
  sol.radius = s.radius;
  sol.regularization = s.regularization;
  sol.control_norm = control_norm(sol.control);
  return sol;
}

}  // namespace

LqSolution lq_endpoint(const HeatModel& model, const HeatState& target, const HeatState& y0, double T,
                       const LqOptions& options) {
  require(target.coeffs.size() == model.N && y0.coeffs.size() == model.N, "lq: truncation mismatch");
  require(options.relaxation >= 0.0, "lq: relaxation must be nonnegative");
  const int K = lq_intervals(T, options.steps_per_unit);
  const Problem p{model.N, Eigen::VectorXd::Ones(model.N), y0.coeffs, target.coeffs, quadratic_hold_pair(model, T / K)};
  Solved s = solve_lq(p, T, options, options.relaxation * target.norm());
  const EndpointReport report = verify_endpoint(model, s.control, y0, target, T);
  return package(SystemKind::Heat, std::move(s), report);
}

LqSolution lq_endpoint(const WaveModel& model, const WaveState& target, const WaveState& y0, double T,
                       const LqOptions& options) {
  require(target.pos.size() == model.N && y0.pos.size() == model.N, "lq: truncation mismatch");
  const int K = lq_intervals(T, options.steps_per_unit);
  Eigen::VectorXd state_cost = Eigen::VectorXd::Zero(model.dim());
  state_cost.head(model.N) = model.weight.cwiseInverse().cwiseAbs2();
  const Problem p{model.N, state_cost, y0.stacked(), target.stacked(), quadratic_hold_pair(model, T / K)};
  Solved s = solve_lq(p, T, options, -1.0);
  const EndpointReport report = verify_endpoint(model, s.control, y0, target, T);
  return package(SystemKind::Wave, std::move(s), report);
}

}  // namespace codimctl
