#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "codimctl/control_synthesis.hpp"
#include "test_support.hpp"

namespace codimctl {
namespace {

HeatState zero_heat(int N) { return HeatState{Eigen::VectorXd::Zero(N)}; }

WaveState unit_displacement(int N, int k) {
  return WaveState::from_raw(Eigen::VectorXd::Unit(N, k - 1), Eigen::VectorXd::Zero(N));
}

TEST(ConjugateGradient, GramianNormErrorNonincreasing) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  const int n = 30;
  Eigen::MatrixXd M = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return g(rng); });
  Eigen::VectorXd spectrum = (Eigen::VectorXd::LinSpaced(n, -6, 0).array() * std::log(10.0)).exp();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd A = Q * spectrum.asDiagonal() * Q.transpose();
  const Eigen::VectorXd x_true = Eigen::VectorXd::NullaryExpr(n, [&] { return g(rng); });
  const Eigen::VectorXd b = A * x_true;
  const CgResult r = conjugate_gradient(A, b, 1e-12, 500, true);
  ASSERT_TRUE(r.converged);
  ASSERT_EQ(static_cast<int>(r.iterates.size()), r.iterations + 1);
  double previous = INFINITY;
  for (const Eigen::VectorXd& x : r.iterates) {
    const Eigen::VectorXd e = x - x_true;
    const double err = std::sqrt(e.dot(A * e));
    EXPECT_LE(err, previous * (1 + 1e-10));
    previous = err;
  }
  EXPECT_LE(r.relative_residual, 1e-12);
}

TEST(ConjugateGradient, ZeroRightHandSide) {
  const CgResult r = conjugate_gradient(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3), 1e-10, 10);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.x.norm(), 0.0);
}

TEST(HumWave, IdentityCase) {
  const int N = 64;
  const HumSolution s = hum_wave(unit_displacement(N, 1), WaveState::zero(N), 2.0, ControlRegion(0, 1), 0.0, N);
  EXPECT_LE(s.endpoint.relative_error, 1e-6);
  EXPECT_LE(s.residual, 1e-10);
  EXPECT_LE(s.cg_iters, 2);
  const WaveModel model(N, ControlRegion(0, 1), 0.0);
  const double quad = s.adjoint_datum.dot(wave_gramian(model, 2.0) * s.adjoint_datum);
  EXPECT_NEAR(s.control_norm * s.control_norm, quad, 1e-8);
  const double sampled = control_norm(sample_control(model, s.control, 2.0, 4000));
  EXPECT_NEAR(sampled * sampled, quad, 1e-6 * quad);
}

TEST(HumWave, BumpTargetUnderGeometricCondition) {
  const int N = 64;
  const WaveModel model(N, ControlRegion(0.25, 0.75), 0.0);
  const WaveState target = WaveState::from_raw(project_function(Bump{}, N), Eigen::VectorXd::Zero(N));
  const HumSolution s = hum_wave(model, target, WaveState::zero(N), 1.0);
  EXPECT_LE(s.endpoint.relative_error, 1e-5);
  const EndpointReport check = verify_endpoint(model, s.control, WaveState::zero(N), target, 1.0);
  EXPECT_NEAR(check.relative_error, s.endpoint.relative_error, 1e-12);
}

TEST(HumWave, FreeEvolutionTargetNeedsNoControl) {
  const int N = 8;
  const WaveModel model(N, ControlRegion(0.1, 0.5), 1.0);
  const WaveState y0 = WaveState::from_raw(Eigen::VectorXd::LinSpaced(N, 1, 0), Eigen::VectorXd::Zero(N));
  const HumSolution s = hum_wave(model, wave_free(model, y0, 0.8), y0, 0.8);
  EXPECT_EQ(s.cg_iters, 0);
  EXPECT_EQ(s.control.datum.norm(), 0.0);
}

TEST(HumWave, SingularGramianIsReported) {
  const int N = 48;
  const WaveModel model(N, ControlRegion(0, 0.3), 0.0);
  try {
    hum_wave(model, unit_displacement(N, N), WaveState::zero(N), 0.2);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_FALSE(e.diagnostics().empty());
  }
}

TEST(HumHeat, FreeEvolutionTargetNeedsNoControl) {
  const int N = 10;
  const HeatModel model(N, ControlRegion(0.2, 0.8));
  const HeatState y0{Eigen::VectorXd::Ones(N)};
  for (double eps : {1e-2, 1e-6}) {
    const HumSolution s = hum_heat_regularized(model, heat_free(y0, 0.5), y0, 0.5, eps);
    EXPECT_EQ(s.control.datum.norm(), 0.0);
    EXPECT_LT(s.endpoint.absolute_error, 1e-15);
  }
}

TEST(HumHeat, RegularizationSweep) {
  const int N = 64;
  const HeatModel model(N, ControlRegion(0.2, 0.8));
  const HeatState smooth{Eigen::VectorXd::Unit(N, 0)};
  const HeatState rough{project_function(Step{}, N)};
  double prev_error = INFINITY, prev_cost = 0.0;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const HumSolution a = hum_heat_regularized(model, smooth, zero_heat(N), 0.5, eps);
    const HumSolution b = hum_heat_regularized(model, rough, zero_heat(N), 0.5, eps);
    EXPECT_LT(a.endpoint.absolute_error, prev_error) << eps;
    EXPECT_GT(b.control_norm, prev_cost) << eps;
    prev_error = a.endpoint.absolute_error;
    prev_cost = b.control_norm;
    const double quad = b.adjoint_datum.dot(heat_gramian(model, 0.5) * b.adjoint_datum);
    EXPECT_NEAR(b.control_norm * b.control_norm, quad, 1e-8 * std::max(1.0, quad));
  }
  EXPECT_THROW(hum_heat_regularized(model, smooth, zero_heat(N), 0.5, 0.0), ValidationError);
}

TEST(VerifyEndpoint, ZeroAndTruncatedControls) {
  const int N = 16;
  const WaveModel model(N, ControlRegion(0.25, 0.75), 0.0);
  const EndpointReport zero =
      verify_endpoint(model, ModalControl{Eigen::VectorXd::Zero(2 * N)}, WaveState::zero(N), WaveState::zero(N), 1.0);
  EXPECT_EQ(zero.absolute_error, 0.0);
  EXPECT_EQ(zero.relative_error, 0.0);

  const WaveState target = WaveState::from_raw(project_function(Bump{}, N), Eigen::VectorXd::Zero(N));
  const HumSolution s = hum_wave(model, target, WaveState::zero(N), 1.0);
  AdjointWaveData data = AdjointWaveData::from_stacked(s.control.datum);
  data.value.tail(N / 2).setZero();
  data.velocity.tail(N / 2).setZero();
  const EndpointReport cut = verify_endpoint(model, ModalControl{data.stacked()}, WaveState::zero(N), target, 1.0);
  EXPECT_GT(cut.relative_error, s.endpoint.relative_error);
}

TEST(Lq, WaveWithoutStateCostIsHum) {
  const int N = 16;
  const WaveModel model(N, ControlRegion(0, 1), 0.0);
  const WaveState target = unit_displacement(N, 1);
  const LqSolution lq = lq_endpoint(model, target, WaveState::zero(N), 2.0, LqOptions{});
  const HumSolution hum = hum_wave(model, target, WaveState::zero(N), 2.0);
  const SampledControl reference = sample_control(model, hum.control, 2.0, lq.control.intervals());
  EXPECT_LE(relative_control_distance(lq.control, reference), 1e-4);
  EXPECT_LE(lq.kkt_residual, 1e-10);
  EXPECT_LE(lq.endpoint_error.relative_error, 1e-10);
  const double recomputed = lq_cost(model, WaveState::zero(N), lq.control, 0.0, 1.0);
  EXPECT_NEAR(lq.cost, recomputed, 1e-6 * recomputed);
}

TEST(Lq, WaveWithStateCost) {
  const int N = 8;
  const WaveModel model(N, ControlRegion(0.2, 0.9), 0.0);
  LqOptions options;
  options.alpha = 2.0;
  options.beta = 0.5;
  const WaveState target = WaveState::from_raw(project_function(Bump{}, N), Eigen::VectorXd::Zero(N));
  const LqSolution lq = lq_endpoint(model, target, WaveState::zero(N), 1.5, options);
  EXPECT_LE(lq.kkt_residual, 1e-10);
  EXPECT_LE(lq.endpoint_error.relative_error, 1e-9);
  const double recomputed = lq_cost(model, WaveState::zero(N), lq.control, 2.0, 0.5);
  EXPECT_NEAR(lq.cost, recomputed, 1e-6 * recomputed);
}

TEST(Lq, FreeEvolutionTargetNeedsNoControl) {
  const int N = 6;
  const HeatModel model(N, ControlRegion(0.2, 0.8));
  const HeatState y0{Eigen::VectorXd::LinSpaced(N, 1, 0.5)};
  // With alpha > 0 the state cost alone makes a nonzero control worthwhile.
  const LqSolution lq = lq_endpoint(model, heat_free(y0, 0.3), y0, 0.3, LqOptions{});
  EXPECT_LT(lq.control.values.norm(), 1e-12);
  EXPECT_LT(lq.multiplier.norm(), 1e-12);
  SampledControl none = lq.control;
  none.values.setZero();
  EXPECT_NEAR(lq.cost, lq_cost(model, y0, none, 0.0, 1.0), 1e-12);
}

TEST(Lq, HeatMultiplierGrowsWithTruncation) {
  LqOptions options;
  options.alpha = 1.0;
  options.beta = 1.0;
  std::vector<double> norms;
  for (int N : {16, 32, 64}) {
    const HeatModel model(N, ControlRegion(0.2, 0.8));
    const HeatState target{project_function(Step{}, N)};
    const LqSolution lq = lq_endpoint(model, target, zero_heat(N), 0.5, options);
    EXPECT_LE(lq.endpoint_error.absolute_error, lq.radius * (1 + 1e-6));
    EXPECT_LE(lq.kkt_residual, 1e-8);
    const double recomputed = lq_cost(model, zero_heat(N), lq.control, 1.0, 1.0);
    EXPECT_NEAR(lq.cost, recomputed, 1e-6 * recomputed);
    norms.push_back(lq.multiplier.norm());
  }
  EXPECT_LT(norms[0], norms[1]);
  EXPECT_LT(norms[1], norms[2]);
}

TEST(Lq, Validation) {
  const HeatModel model(4, ControlRegion(0.2, 0.8));
  LqOptions options;
  options.beta = 0.0;
  EXPECT_THROW(lq_endpoint(model, HeatState{Eigen::VectorXd::Ones(4)}, zero_heat(4), 0.5, options), ValidationError);
  EXPECT_EQ(lq_intervals(0.5, 200), 100);
  EXPECT_EQ(lq_intervals(0.105, 100), 12);
}

}  // namespace
}  // namespace codimctl
