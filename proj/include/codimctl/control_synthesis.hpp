#pragma once

// Control synthesis on the truncated heat and wave systems:
//  * HUM: minimal L^2 control u = B^* phi with the adjoint datum phi solving a Gramian system;
//  * regularized HUM for the heat system, (G + eps I) phi = deficit;
//  * the endpoint-constrained LQ problem min 1/2 \int (alpha |y|^2 + beta |u|^2) on a uniform time
//    grid, solved as a saddle-point (KKT) system;
//  * endpoint certification by independent forward simulation.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "codimctl/gramian.hpp"
#include "codimctl/propagators.hpp"

namespace codimctl {

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;
  std::vector<Eigen::VectorXd> iterates;  ///< filled only when requested
};

/// Conjugate gradient for a symmetric PSD matrix, stopping at |A x - b| <= tol |b|. A zero
/// right-hand side returns x = 0 after zero iterations.
CgResult conjugate_gradient(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol, int max_iterations,
                            bool keep_iterates = false);

struct EndpointReport {
  double absolute_error = 0.0;
  double relative_error = 0.0;  ///< absolute / |target|, or absolute when the target is zero
  double target_norm = 0.0;
};

EndpointReport endpoint_error(const Eigen::VectorXd& reached, const Eigen::VectorXd& target);

/// Forward-simulates `u` and measures the endpoint against `target` in the state norm
/// (L^2 for heat, energy norm for wave).
EndpointReport verify_endpoint(const HeatModel& model, const ControlSignal& u, const HeatState& y0,
                               const HeatState& target, double T);
EndpointReport verify_endpoint(const WaveModel& model, const ControlSignal& u, const WaveState& y0,
                               const WaveState& target, double T);

struct HumSolution {
  SystemKind kind = SystemKind::Wave;
  Eigen::VectorXd adjoint_datum;
  ModalControl control;
  /// Endpoint implied by the Gramian solve (stacked for wave).
  Eigen::VectorXd predicted_endpoint;
  /// Endpoint from independent forward simulation (stacked for wave).
  Eigen::VectorXd simulated_endpoint;
  int cg_iters = 0;
  double residual = 0.0;  ///< |G phi - rhs| / |rhs| (regularized matrix for heat)
  double control_norm = 0.0;
  double eps = 0.0;  ///< heat regularization, 0 for wave
  EndpointReport endpoint;
};

struct HumWaveOptions {
  double cg_tol = 1e-10;
  int max_iterations = 0;  ///< 0: 10 * dimension
  /// Relative endpoint error above which certification fails.
  double certify_tol = 1e-5;
};

/// Solves G phi = J^T (target - free evolution of y0) by CG and returns u = B^* psi. Throws
/// NumericalError with the Gramian's low spectrum attached on CG stagnation, and on failed
/// certification.
HumSolution hum_wave(const WaveState& target, const WaveState& y0, double T, const ControlRegion& region, double c,
                     int N, const HumWaveOptions& options = {});
HumSolution hum_wave(const WaveModel& model, const WaveState& target, const WaveState& y0, double T,
                     const HumWaveOptions& options = {});

/// Solves (G + eps I) phi = target - free evolution of y0 (Cholesky) and returns u = B^* phi.
HumSolution hum_heat_regularized(const HeatState& target, const HeatState& y0, double T, const ControlRegion& region,
                                 int N, double eps);
HumSolution hum_heat_regularized(const HeatModel& model, const HeatState& target, const HeatState& y0, double T,
                                 double eps);

// ---------------------------------------------------------------------------
// Endpoint-constrained LQ.

struct LqOptions {
  double alpha = 0.0;
  double beta = 1.0;
  /// Uniform time grid density; the interval count is rounded up to an even number.
  int steps_per_unit = 200;
  /// Heat only: endpoint radius as a fraction of |target|.
  double relaxation = 1e-3;
};

struct LqSolution {
  SystemKind kind = SystemKind::Heat;
  SampledControl control;
  Eigen::VectorXd multiplier;  ///< endpoint-constraint multiplier
  double cost = 0.0;
  double kkt_residual = 0.0;  ///< |K w - r| / |r| for the full saddle-point system
  Eigen::VectorXd endpoint;   ///< stacked for wave
  EndpointReport endpoint_error;
  double radius = 0.0;           ///< heat endpoint radius actually enforced (0 for wave)
  double regularization = 0.0;   ///< eps in the regularized normal equations (0 for wave)
  double control_norm = 0.0;
};

int lq_intervals(double T, int steps_per_unit);

/// Heat: minimize J subject to |y(T) - target| <= relaxation * |target|. The constraint is enforced
/// through the regularized normal equations (S + eps I) mu = y_unconstrained(T) - target, with eps
/// chosen so the endpoint residual equals the radius. Throws NumericalError when no eps >= 1e-14 |S|
/// reaches the radius.
LqSolution lq_endpoint(const HeatModel& model, const HeatState& target, const HeatState& y0, double T,
                       const LqOptions& options);

/// Wave: minimize J subject to y(T) = target exactly. Throws NumericalError when the reduced
/// endpoint system is singular.
LqSolution lq_endpoint(const WaveModel& model, const WaveState& target, const WaveState& y0, double T,
                       const LqOptions& options);

/// 1/2 \int (alpha |y|^2_{L^2} + beta |u|^2) by Simpson's rule on the control grid, with the state
/// trajectory recomputed from the control.
double lq_cost(const HeatModel& model, const HeatState& y0, const SampledControl& u, double alpha, double beta);
double lq_cost(const WaveModel& model, const WaveState& y0, const SampledControl& u, double alpha, double beta);

/// Relative L^2(0, T; L^2(omega)) distance between two sampled controls on the same grid.
double relative_control_distance(const SampledControl& u, const SampledControl& reference);

}  // namespace codimctl
