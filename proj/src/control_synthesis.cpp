#include "codimctl/control_synthesis.hpp"

#include <algorithm>

#include "codimctl/codim_analysis.hpp"
#include "codimctl/errors.hpp"
#include "codimctl/quadrature.hpp"

namespace codimctl {

CgResult conjugate_gradient(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol, int max_iterations,
                            bool keep_iterates) {
  require(A.rows() == A.cols() && A.rows() == b.size(), "conjugate_gradient: shape mismatch");
  require(tol > 0.0, "conjugate_gradient: tolerance must be positive");
  CgResult result;
  result.x = Eigen::VectorXd::Zero(b.size());
  const double bnorm = b.norm();
  if (keep_iterates) result.iterates.push_back(result.x);
  if (bnorm == 0.0) {
    result.converged = true;
    return result;
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  result.residual_history.push_back(1.0);
  while (result.iterations < max_iterations) {
    const Eigen::VectorXd Ap = A * p;
    const double curvature = p.dot(Ap);
    if (curvature <= 0.0) break;
    const double step = rr / curvature;
    result.x += step * p;
    r -= step * Ap;
    ++result.iterations;
    if (keep_iterates) result.iterates.push_back(result.x);
    const double rr_next = r.squaredNorm();
    result.residual_history.push_back(std::sqrt(rr_next) / bnorm);
    if (std::sqrt(rr_next) <= tol * bnorm) {
      result.converged = true;
      break;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  // Report the true residual, not the recursively updated one.
  result.relative_residual = (A * result.x - b).norm() / bnorm;
  result.converged = result.converged && result.relative_residual <= 10.0 * tol;
  return result;
}

EndpointReport endpoint_error(const Eigen::VectorXd& reached, const Eigen::VectorXd& target) {
  require(reached.size() == target.size(), "endpoint_error: size mismatch");
  EndpointReport report;
  report.absolute_error = (reached - target).norm();
  report.target_norm = target.norm();
  report.relative_error = report.target_norm > 0.0 ? report.absolute_error / report.target_norm : report.absolute_error;
  return report;
}

EndpointReport verify_endpoint(const HeatModel& model, const ControlSignal& u, const HeatState& y0,
                               const HeatState& target, double T) {
  return endpoint_error(heat_forward(model, y0, u, T).coeffs, target.coeffs);
}

EndpointReport verify_endpoint(const WaveModel& model, const ControlSignal& u, const WaveState& y0,
                               const WaveState& target, double T) {
  return endpoint_error(wave_forward(model, y0, u, T).stacked(), target.stacked());
}

namespace {

nlohmann::json low_spectrum(const Eigen::MatrixXd& G) {
  const Eigen::VectorXd eigs = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues();
  const double tau = 1e-8 * std::max(eigs.maxCoeff(), 1e-300);
  const SpectrumReport report = spectrum(G, tau);
  std::vector<double> lowest;
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(10, eigs.size()); ++j) lowest.push_back(eigs(j));
  return {{"tau", tau}, {"defect_count", report.defect_count}, {"lowest_eigenvalues", lowest}};
}

}  // namespace

HumSolution hum_wave(const WaveModel& model, const WaveState& target, const WaveState& y0, double T,
                     const HumWaveOptions& options) {
  require(T > 0.0, "hum_wave: horizon must be positive");
  require(target.pos.size() == model.N && target.vel.size() == model.N, "hum_wave: target truncation mismatch");
  require(options.cg_tol > 0.0, "hum_wave: CG tolerance must be positive");
  const Eigen::MatrixXd G = wave_gramian(model, T);
  const Eigen::VectorXd free_end = wave_free(model, y0, T).stacked();
  const Eigen::VectorXd rhs = pairing_map_transpose(target.stacked() - free_end);
  const int max_iterations = options.max_iterations > 0 ? options.max_iterations : 10 * model.dim();
  const CgResult cg = conjugate_gradient(G, rhs, options.cg_tol, max_iterations);
  if (!cg.converged) {
    nlohmann::json diag = low_spectrum(G);
    diag["cg_iterations"] = cg.iterations;
    diag["relative_residual"] = cg.relative_residual;
    throw NumericalError("hum_wave: conjugate gradient stagnated (Gramian effectively singular)", diag);
  }
  HumSolution sol;
  sol.kind = SystemKind::Wave;
  sol.adjoint_datum = cg.x;
  sol.control = ModalControl{cg.x};
  sol.predicted_endpoint = free_end + pairing_map(G * cg.x);
  sol.cg_iters = cg.iterations;
  sol.residual = cg.relative_residual;
  sol.control_norm = std::sqrt(std::max(0.0, cg.x.dot(G * cg.x)));
  sol.simulated_endpoint = wave_forward(model, y0, sol.control, T).stacked();
  sol.endpoint = endpoint_error(sol.simulated_endpoint, target.stacked());
  if (sol.endpoint.relative_error > options.certify_tol) {
    throw NumericalError("hum_wave: certification failed",
                         {{"relative_error", sol.endpoint.relative_error}, {"certify_tol", options.certify_tol}});
  }
  return sol;
}

HumSolution hum_wave(const WaveState& target, const WaveState& y0, double T, const ControlRegion& region, double c,
                     int N, const HumWaveOptions& options) {
  return hum_wave(WaveModel(N, region, c), target, y0, T, options);
}

HumSolution hum_heat_regularized(const HeatModel& model, const HeatState& target, const HeatState& y0, double T,
                                 double eps) {
  require(T > 0.0, "hum_heat_regularized: horizon must be positive");
  require(eps > 0.0 && std::isfinite(eps), "hum_heat_regularized: eps must be positive");
  require(target.coeffs.size() == model.N, "hum_heat_regularized: target truncation mismatch");
  const Eigen::MatrixXd G = heat_gramian(model, T);
  const Eigen::VectorXd free_end = heat_free(y0, T).coeffs;
  const Eigen::VectorXd rhs = target.coeffs - free_end;
  const Eigen::MatrixXd regularized = G + eps * Eigen::MatrixXd::Identity(model.N, model.N);
  const Eigen::LLT<Eigen::MatrixXd> chol(regularized);
  if (chol.info() != Eigen::Success) throw NumericalError("hum_heat_regularized: Cholesky factorization failed");

  HumSolution sol;
  sol.kind = SystemKind::Heat;
  sol.eps = eps;
  sol.adjoint_datum = rhs.norm() == 0.0 ? Eigen::VectorXd::Zero(model.N) : Eigen::VectorXd(chol.solve(rhs));
  sol.control = ModalControl{sol.adjoint_datum};
  sol.predicted_endpoint = free_end + G * sol.adjoint_datum;
  sol.residual = rhs.norm() > 0.0 ? (regularized * sol.adjoint_datum - rhs).norm() / rhs.norm() : 0.0;
  sol.control_norm = std::sqrt(std::max(0.0, sol.adjoint_datum.dot(G * sol.adjoint_datum)));
  sol.simulated_endpoint = heat_forward(model, y0, sol.control, T).coeffs;
  sol.endpoint = endpoint_error(sol.simulated_endpoint, target.coeffs);
  return sol;
}

HumSolution hum_heat_regularized(const HeatState& target, const HeatState& y0, double T, const ControlRegion& region,
                                 int N, double eps) {
  return hum_heat_regularized(HeatModel(N, region), target, y0, T, eps);
}

double lq_cost(const HeatModel& model, const HeatState& y0, const SampledControl& u, double alpha, double beta) {
  const Eigen::MatrixXd states = heat_trajectory(model, y0, u);
  const Eigen::VectorXd w = simpson_weights(u.intervals(), u.dt);
  const Eigen::VectorXd density =
      alpha * states.colwise().squaredNorm().transpose() + beta * u.values.colwise().squaredNorm().transpose();
  return 0.5 * w.dot(density);
}

double lq_cost(const WaveModel& model, const WaveState& y0, const SampledControl& u, double alpha, double beta) {
  const Eigen::MatrixXd states = wave_trajectory(model, y0, u);
  const Eigen::VectorXd w = simpson_weights(u.intervals(), u.dt);
  // |y|_{L^2}^2 = sum (pos_n / (n pi))^2
  const Eigen::MatrixXd displacement = model.weight.cwiseInverse().asDiagonal() * states.topRows(model.N);
  const Eigen::VectorXd density =
      alpha * displacement.colwise().squaredNorm().transpose() + beta * u.values.colwise().squaredNorm().transpose();
  return 0.5 * w.dot(density);
}

double relative_control_distance(const SampledControl& u, const SampledControl& reference) {
  require(u.values.rows() == reference.values.rows() && u.values.cols() == reference.values.cols(),
          "relative_control_distance: grid mismatch");
  require(std::abs(u.dt - reference.dt) <= 1e-12 * reference.dt, "relative_control_distance: step mismatch");
  const double ref = control_norm(reference);
  const double diff = control_norm(SampledControl{u.dt, u.values - reference.values});
  return ref > 0.0 ? diff / ref : diff;
}

}  // namespace codimctl
