#pragma once

// Mode-wise propagators for the controlled heat and wave equations on (0, 1) with interior
// control chi_omega u, their backward adjoints, and Duhamel forward simulation.
//
// Coordinates. Heat states are L^2 eigen-coefficients. Wave states are "weighted": pos_n carries
// the H^1_0 weight n*pi, vel_n is the L^2 coefficient of y_t, so the energy norm is Euclidean.
// Adjoint wave data store psi(T) in L^2 and psi_t(T) in H^{-1} with the 1/(n*pi) weight applied.
// With these conventions the duality pairing
//     <y(T), (psi_1, psi_2)> = <y_t(T), psi_1>_{L^2} - <y(T), psi_2>_{H^1_0, H^{-1}}
// is the Euclidean dot product of the stacked state (pos; vel) with J * (value; velocity),
// where J (value; velocity) = (-velocity; value).

#include <array>
#include <complex>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "codimctl/spectral_basis.hpp"

namespace codimctl {

/// coef * t^power * exp(rate * t)
struct ExpTerm {
  std::complex<double> coef;
  int power = 0;
  std::complex<double> rate;
};

/// \int_0^length t^k exp(z t) dt. Uses a Taylor series when |z| * length < 1 (this covers the
/// resonant and critical cases) and the integration-by-parts recurrence otherwise.
std::complex<double> exp_moment(int k, std::complex<double> z, double length);

/// Fundamental solutions of y'' + kappa y = 0: C(0) = 1, C'(0) = 0 and S(0) = 0, S'(0) = 1.
/// kappa > 0 is oscillatory, kappa < 0 hyperbolic, |kappa| <= kCriticalKappa is treated as zero.
class OscillatorKernel {
 public:
  enum class Branch { Oscillatory, Critical, Hyperbolic };
  static constexpr double kCriticalKappa = 1e-10;
  static constexpr double kMaxExponent = 700.0;

  explicit OscillatorKernel(double kappa);

  double kappa() const { return kappa_; }
  Branch branch() const { return branch_; }
  /// sqrt(|kappa|), zero on the critical branch.
  double rate() const { return rate_; }

  double cosine(double t) const;
  double sine(double t) const;

  std::span<const ExpTerm> cosine_terms() const { return cosine_terms_; }
  std::span<const ExpTerm> sine_terms() const { return sine_terms_; }

  /// Throws NumericalError when exp(rate * |t|) would overflow.
  void check_horizon(double t) const;

 private:
  double kappa_;
  double rate_ = 0.0;
  Branch branch_;
  std::vector<ExpTerm> cosine_terms_;
  std::vector<ExpTerm> sine_terms_;
};

/// \int_0^length f(t) g(t) t^extra dt for term expansions f and g.
double integrate_product(std::span<const ExpTerm> f, std::span<const ExpTerm> g, double length, int extra = 0);
/// \int_0^length f(t) t^extra dt.
double integrate_terms(std::span<const ExpTerm> f, double length, int extra = 0);

// ---------------------------------------------------------------------------
// Models: spectral data precomputed for one truncation.

struct HeatModel {
  HeatModel(int N, ControlRegion region);

  int N;
  ControlRegion region;
  Eigen::VectorXd lambda;
  Eigen::MatrixXd overlap;       ///< B_mn = \int_omega e_m e_n
  Eigen::MatrixXd overlap_sqrt;  ///< symmetric square root of B
};

struct WaveModel {
  WaveModel(int N, ControlRegion region, double potential);

  int N;
  ControlRegion region;
  double potential;
  Eigen::VectorXd weight;  ///< n * pi
  std::vector<OscillatorKernel> kernels;
  Eigen::MatrixXd overlap;
  Eigen::MatrixXd overlap_sqrt;

  int dim() const { return 2 * N; }
};

// ---------------------------------------------------------------------------
// States.

struct HeatState {
  Eigen::VectorXd coeffs;

  double norm() const { return coeffs.norm(); }
};

struct WaveState {
  Eigen::VectorXd pos;
  Eigen::VectorXd vel;

  static WaveState zero(int N) { return {Eigen::VectorXd::Zero(N), Eigen::VectorXd::Zero(N)}; }
  /// From plain eigen-coefficients of y and y_t.
  static WaveState from_raw(const Eigen::VectorXd& y, const Eigen::VectorXd& yt);
  static WaveState from_stacked(const Eigen::VectorXd& s);

  Eigen::VectorXd stacked() const;
  Eigen::VectorXd displacement() const;  ///< plain eigen-coefficients of y
  double energy_norm() const { return std::sqrt(pos.squaredNorm() + vel.squaredNorm()); }
};

struct AdjointWaveData {
  Eigen::VectorXd value;     ///< coefficients of psi(T) in L^2
  Eigen::VectorXd velocity;  ///< coefficients of psi_t(T), weighted by 1/(n pi)

  /// From plain eigen-coefficients of psi and psi_t.
  static AdjointWaveData from_raw(const Eigen::VectorXd& psi, const Eigen::VectorXd& psi_t);
  static AdjointWaveData from_stacked(const Eigen::VectorXd& s);
  Eigen::VectorXd stacked() const;
};

/// J (value; velocity) = (-velocity; value): maps adjoint data to the state it pairs with.
Eigen::VectorXd pairing_map(const Eigen::VectorXd& adjoint_stacked);
/// J^T (pos; vel) = (vel; -pos).
Eigen::VectorXd pairing_map_transpose(const Eigen::VectorXd& state_stacked);

// ---------------------------------------------------------------------------
// Controls.

/// u = B^* phi: the restriction to omega of the adjoint solution generated by `datum`
/// (heat: phi_T, length N; wave: stacked AdjointWaveData, length 2N).
struct ModalControl {
  Eigen::VectorXd datum;
};

/// Uniformly sampled control. Column k holds the coordinates of chi_omega u(k dt) in the
/// orthonormal frame B^{-1/2}{chi_omega e_m}: the modal forcing is overlap_sqrt * column and the
/// pointwise L^2(omega) norm is the column norm. The interval count is even; on each pair of
/// intervals the control is the quadratic through its three samples, the interpolant for which
/// Simpson's rule is the matching quadrature.
struct SampledControl {
  double dt = 0.0;
  Eigen::MatrixXd values;

  int intervals() const { return static_cast<int>(values.cols()) - 1; }
  double horizon() const { return dt * intervals(); }
};

using ControlSignal = std::variant<ModalControl, SampledControl>;

/// Largest step accepted for sampled controls.
inline constexpr double kMaxSampleStep = 0.01;

/// Simpson-rule L^2(0, T; L^2(omega)) norm of a sampled control.
double control_norm(const SampledControl& u);

// ---------------------------------------------------------------------------
// Adjoint (backward) propagators.

/// phi(t) for phi_t + phi_xx = 0, phi(T) = phi_T.
Eigen::VectorXd heat_adjoint(const Eigen::VectorXd& phi_T, double t, double T);

/// (psi(t), psi_t(t)) in adjoint coordinates for psi_tt - psi_xx + c psi = 0.
AdjointWaveData wave_adjoint(const AdjointWaveData& data, double t, double T, double c);

/// Plain modal values psi_n(t) (no weights).
Eigen::VectorXd wave_adjoint_values(const WaveModel& model, const AdjointWaveData& data, double t, double T);

// ---------------------------------------------------------------------------
// Free evolution and forward simulation.

HeatState heat_free(const HeatState& y0, double t);
WaveState wave_free(const WaveModel& model, const WaveState& y0, double t);

HeatState heat_forward(const HeatModel& model, const HeatState& y0, const ControlSignal& u, double T);
WaveState wave_forward(const WaveModel& model, const WaveState& y0, const ControlSignal& u, double T);

/// States at every sample time of a sampled control (columns). Wave columns are stacked (pos; vel).
Eigen::MatrixXd heat_trajectory(const HeatModel& model, const HeatState& y0, const SampledControl& u);
Eigen::MatrixXd wave_trajectory(const WaveModel& model, const WaveState& y0, const SampledControl& u);

/// Frame coordinates of a modal control at time t (see SampledControl).
Eigen::VectorXd control_at(const HeatModel& model, const ModalControl& u, double t, double T);
Eigen::VectorXd control_at(const WaveModel& model, const ModalControl& u, double t, double T);

/// Samples a modal control on `intervals` uniform steps over [0, T].
SampledControl sample_control(const HeatModel& model, const ModalControl& u, double T, int intervals);
SampledControl sample_control(const WaveModel& model, const ModalControl& u, double T, int intervals);

/// Quadratic through samples (f_0, f_1, f_2) at local times (0, h, 2h), evaluated at s.
Eigen::VectorXd quadratic_hold(const Eigen::VectorXd& f0, const Eigen::VectorXd& f1, const Eigen::VectorXd& f2,
                               double h, double s);

/// Exact propagator over one pair of intervals for a control that is quadratic in time:
///   x_{k+1} = half_transition x_k + sum_i half[i] z_{k+i},
///   x_{k+2} = full_transition x_k + sum_i full[i] z_{k+i},   i = 0, 1, 2.
struct QuadraticHoldPair {
  Eigen::MatrixXd half_transition;
  Eigen::MatrixXd full_transition;
  std::array<Eigen::MatrixXd, 3> half;
  std::array<Eigen::MatrixXd, 3> full;
};

QuadraticHoldPair quadratic_hold_pair(const HeatModel& model, double dt);
QuadraticHoldPair quadratic_hold_pair(const WaveModel& model, double dt);

}  // namespace codimctl
