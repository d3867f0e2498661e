#include "codimctl/propagators.hpp"

#include <numbers>

#include "codimctl/errors.hpp"
#include "codimctl/quadrature.hpp"

namespace codimctl {

namespace {

constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& B) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(B);
  const Eigen::VectorXd root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

void check_time(double t, double T) {
  require(std::isfinite(t) && std::isfinite(T), "propagator: times must be finite");
  require(0.0 <= t && t <= T, "propagator: need 0 <= t <= T");
}

void check_sampled(const SampledControl& u, int N) {
  require(u.values.rows() == N, "sampled control: row count must match truncation order");
  require(u.values.cols() >= 3 && u.values.cols() % 2 == 1, "sampled control: need an even interval count >= 2");
  require(u.dt > 0.0, "sampled control: dt must be positive");
  require(u.dt <= kMaxSampleStep, "sampled control: dt too coarse (must be <= 0.01)");
}

template <class Model>
Eigen::MatrixXd trajectory(const Model& model, const Eigen::VectorXd& x0, const SampledControl& u) {
  const QuadraticHoldPair step = quadratic_hold_pair(model, u.dt);
  Eigen::MatrixXd states(x0.size(), u.values.cols());
  states.col(0) = x0;
  for (Eigen::Index k = 0; k + 2 < u.values.cols(); k += 2) {
    const Eigen::VectorXd x = states.col(k);
    Eigen::VectorXd half = step.half_transition * x;
    Eigen::VectorXd full = step.full_transition * x;
    for (int i = 0; i < 3; ++i) {
      half += step.half[i] * u.values.col(k + i);
      full += step.full[i] * u.values.col(k + i);
    }
    states.col(k + 1) = half;
    states.col(k + 2) = full;
  }
  return states;
}

}  // namespace

std::complex<double> exp_moment(int k, std::complex<double> z, double length) {
  const double L = length;
  if (std::abs(z) * L < 1.0) {
    // L^{k+1} sum_j (zL)^j / (j! (j + k + 1))
    const cplx w = z * L;
    cplx power = 1.0;
    cplx sum = 0.0;
    double factorial = 1.0;
    for (int j = 0; j < 60; ++j) {
      if (j > 0) {
        power *= w;
        factorial *= j;
      }
      const cplx term = power / (factorial * (j + k + 1));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return std::pow(L, k + 1) * sum;
  }
  if (z.real() * L > OscillatorKernel::kMaxExponent) {
    throw NumericalError("exp_moment: exponent overflow", {{"exponent", z.real() * L}});
  }
  const cplx e = std::exp(z * L);
  cplx m = (e - 1.0) / z;
  double Lpow = 1.0;
  for (int j = 1; j <= k; ++j) {
    Lpow *= L;
    m = (Lpow * e - double(j) * m) / z;
  }
  return m;
}

OscillatorKernel::OscillatorKernel(double kappa) : kappa_(kappa) {
  if (std::abs(kappa) <= kCriticalKappa) {
    branch_ = Branch::Critical;
    cosine_terms_ = {{1.0, 0, 0.0}};
    sine_terms_ = {{1.0, 1, 0.0}};
  } else if (kappa > 0.0) {
    branch_ = Branch::Oscillatory;
    rate_ = std::sqrt(kappa);
    const cplx i(0.0, 1.0);
    cosine_terms_ = {{0.5, 0, i * rate_}, {0.5, 0, -i * rate_}};
    const cplx c = 1.0 / (2.0 * i * rate_);
    sine_terms_ = {{c, 0, i * rate_}, {-c, 0, -i * rate_}};
  } else {
    branch_ = Branch::Hyperbolic;
    rate_ = std::sqrt(-kappa);
    cosine_terms_ = {{0.5, 0, rate_}, {0.5, 0, -rate_}};
    const double c = 1.0 / (2.0 * rate_);
    sine_terms_ = {{c, 0, rate_}, {-c, 0, -rate_}};
  }
}

void OscillatorKernel::check_horizon(double t) const {
  if (branch_ == Branch::Hyperbolic && rate_ * std::abs(t) > kMaxExponent) {
    throw NumericalError("hyperbolic mode overflow", {{"kappa", kappa_}, {"exponent", rate_ * std::abs(t)}});
  }
}

double OscillatorKernel::cosine(double t) const {
  switch (branch_) {
    case Branch::Oscillatory:
      return std::cos(rate_ * t);
    case Branch::Hyperbolic:
      check_horizon(t);
      return std::cosh(rate_ * t);
    case Branch::Critical:
      break;
  }
  return 1.0;
}

double OscillatorKernel::sine(double t) const {
  switch (branch_) {
    case Branch::Oscillatory:
      return std::sin(rate_ * t) / rate_;
    case Branch::Hyperbolic:
      check_horizon(t);
      return std::sinh(rate_ * t) / rate_;
    case Branch::Critical:
      break;
  }
  return t;
}

double integrate_product(std::span<const ExpTerm> f, std::span<const ExpTerm> g, double length, int extra) {
  cplx total = 0.0;
  for (const ExpTerm& a : f) {
    for (const ExpTerm& b : g) total += a.coef * b.coef * exp_moment(a.power + b.power + extra, a.rate + b.rate, length);
  }
  return total.real();
}

double integrate_terms(std::span<const ExpTerm> f, double length, int extra) {
  cplx total = 0.0;
  for (const ExpTerm& a : f) total += a.coef * exp_moment(a.power + extra, a.rate, length);
  return total.real();
}

// ---------------------------------------------------------------------------

HeatModel::HeatModel(int n, ControlRegion r) : N(n), region(r) {
  require(N >= 1, "HeatModel: truncation order must be >= 1");
  lambda.resize(N);
  for (int k = 1; k <= N; ++k) lambda(k - 1) = eigenvalue(k);
  overlap = overlap_matrix(region, N);
  overlap_sqrt = symmetric_sqrt(overlap);
}

WaveModel::WaveModel(int n, ControlRegion r, double c) : N(n), region(r), potential(c) {
  require(N >= 1, "WaveModel: truncation order must be >= 1");
  require(std::isfinite(c), "WaveModel: potential must be finite");
  weight.resize(N);
  kernels.reserve(N);
  for (int k = 1; k <= N; ++k) {
    weight(k - 1) = k * kPi;
    kernels.emplace_back(eigenvalue(k) + c);
  }
  overlap = overlap_matrix(region, N);
  overlap_sqrt = symmetric_sqrt(overlap);
}

WaveState WaveState::from_raw(const Eigen::VectorXd& y, const Eigen::VectorXd& yt) {
  require(y.size() == yt.size(), "WaveState: size mismatch");
  const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(y.size(), 1.0, double(y.size())) * kPi;
  return {w.cwiseProduct(y), yt};
}

WaveState WaveState::from_stacked(const Eigen::VectorXd& s) {
  require(s.size() % 2 == 0, "WaveState: stacked vector must have even length");
  const Eigen::Index N = s.size() / 2;
  return {s.head(N), s.tail(N)};
}

Eigen::VectorXd WaveState::stacked() const {
  Eigen::VectorXd s(pos.size() + vel.size());
  s << pos, vel;
  return s;
}

Eigen::VectorXd WaveState::displacement() const {
  const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(pos.size(), 1.0, double(pos.size())) * kPi;
  return pos.cwiseQuotient(w);
}

AdjointWaveData AdjointWaveData::from_raw(const Eigen::VectorXd& psi, const Eigen::VectorXd& psi_t) {
  require(psi.size() == psi_t.size(), "AdjointWaveData: size mismatch");
  const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(psi.size(), 1.0, double(psi.size())) * kPi;
  return {psi, psi_t.cwiseQuotient(w)};
}

AdjointWaveData AdjointWaveData::from_stacked(const Eigen::VectorXd& s) {
  require(s.size() % 2 == 0, "AdjointWaveData: stacked vector must have even length");
  const Eigen::Index N = s.size() / 2;
  return {s.head(N), s.tail(N)};
}

Eigen::VectorXd AdjointWaveData::stacked() const {
  Eigen::VectorXd s(value.size() + velocity.size());
  s << value, velocity;
  return s;
}

Eigen::VectorXd pairing_map(const Eigen::VectorXd& a) {
  const Eigen::Index N = a.size() / 2;
  Eigen::VectorXd s(a.size());
  s << -a.tail(N), a.head(N);
  return s;
}

Eigen::VectorXd pairing_map_transpose(const Eigen::VectorXd& s) {
  const Eigen::Index N = s.size() / 2;
  Eigen::VectorXd a(s.size());
  a << s.tail(N), -s.head(N);
  return a;
}

double control_norm(const SampledControl& u) {
  const Eigen::VectorXd w = simpson_weights(u.intervals(), u.dt);
  return std::sqrt(u.values.colwise().squaredNorm().dot(w));
}

// ---------------------------------------------------------------------------

Eigen::VectorXd heat_adjoint(const Eigen::VectorXd& phi_T, double t, double T) {
  check_time(t, T);
  Eigen::VectorXd phi(phi_T.size());
  for (Eigen::Index n = 0; n < phi.size(); ++n) phi(n) = phi_T(n) * std::exp(-eigenvalue(int(n) + 1) * (T - t));
  return phi;
}

AdjointWaveData wave_adjoint(const AdjointWaveData& data, double t, double T, double c) {
  check_time(t, T);
  require(data.value.size() == data.velocity.size(), "wave_adjoint: size mismatch");
  const double tau = t - T;
  AdjointWaveData out{Eigen::VectorXd(data.value.size()), Eigen::VectorXd(data.value.size())};
  for (Eigen::Index n = 0; n < data.value.size(); ++n) {
    const OscillatorKernel k(eigenvalue(int(n) + 1) + c);
    const double w = (n + 1) * kPi;
    const double C = k.cosine(tau);
    const double S = k.sine(tau);
    out.value(n) = data.value(n) * C + data.velocity(n) * w * S;
    out.velocity(n) = (-k.kappa() * S * data.value(n) + w * C * data.velocity(n)) / w;
  }
  return out;
}

Eigen::VectorXd wave_adjoint_values(const WaveModel& model, const AdjointWaveData& data, double t, double T) {
  check_time(t, T);
  const double tau = t - T;
  Eigen::VectorXd psi(model.N);
  for (int n = 0; n < model.N; ++n) {
    const OscillatorKernel& k = model.kernels[n];
    psi(n) = data.value(n) * k.cosine(tau) + data.velocity(n) * model.weight(n) * k.sine(tau);
  }
  return psi;
}

HeatState heat_free(const HeatState& y0, double t) {
  require(t >= 0.0, "heat_free: time must be nonnegative");
  return {heat_adjoint(y0.coeffs, 0.0, t)};
}

WaveState wave_free(const WaveModel& model, const WaveState& y0, double t) {
  require(t >= 0.0, "wave_free: time must be nonnegative");
  require(y0.pos.size() == model.N && y0.vel.size() == model.N, "wave_free: truncation mismatch");
  WaveState out = WaveState::zero(model.N);
  for (int n = 0; n < model.N; ++n) {
    const OscillatorKernel& k = model.kernels[n];
    const double w = model.weight(n);
    const double C = k.cosine(t);
    const double S = k.sine(t);
    out.pos(n) = C * y0.pos(n) + w * S * y0.vel(n);
    out.vel(n) = -k.kappa() * S * y0.pos(n) / w + C * y0.vel(n);
  }
  return out;
}

HeatState heat_forward(const HeatModel& model, const HeatState& y0, const ControlSignal& u, double T) {
  require(T > 0.0, "heat_forward: horizon must be positive");
  require(y0.coeffs.size() == model.N, "heat_forward: truncation mismatch");
  if (const auto* modal = std::get_if<ModalControl>(&u)) {
    require(modal->datum.size() == model.N, "heat_forward: datum size mismatch");
    HeatState out = heat_free(y0, T);
    for (int n = 0; n < model.N; ++n) {
      double acc = 0.0;
      for (int m = 0; m < model.N; ++m) {
        // \int_0^T e^{-lambda_n sigma} e^{-lambda_m sigma} d sigma
        const double kernel = exp_moment(0, -(model.lambda(n) + model.lambda(m)), T).real();
        acc += model.overlap(n, m) * modal->datum(m) * kernel;
      }
      out.coeffs(n) += acc;
    }
    return out;
  }
  const auto& sampled = std::get<SampledControl>(u);
  check_sampled(sampled, model.N);
  require(std::abs(sampled.horizon() - T) <= 1e-9 * std::max(1.0, T), "heat_forward: control horizon differs from T");
  const Eigen::MatrixXd states = heat_trajectory(model, y0, sampled);
  return {states.col(states.cols() - 1)};
}

WaveState wave_forward(const WaveModel& model, const WaveState& y0, const ControlSignal& u, double T) {
  require(T > 0.0, "wave_forward: horizon must be positive");
  require(y0.pos.size() == model.N && y0.vel.size() == model.N, "wave_forward: truncation mismatch");
  for (const auto& k : model.kernels) k.check_horizon(T);
  if (const auto* modal = std::get_if<ModalControl>(&u)) {
    require(modal->datum.size() == model.dim(), "wave_forward: datum size mismatch");
    const AdjointWaveData data = AdjointWaveData::from_stacked(modal->datum);
    WaveState out = wave_free(model, y0, T);
    // Duhamel with sigma = T - s: psi_m(s) = c_m C_m(sigma) - dv_m w_m S_m(sigma).
    for (int n = 0; n < model.N; ++n) {
      const OscillatorKernel& kn = model.kernels[n];
      double y = 0.0;
      double yt = 0.0;
      for (int m = 0; m < model.N; ++m) {
        const double b = model.overlap(n, m);
        if (b == 0.0) continue;
        const OscillatorKernel& km = model.kernels[m];
        const double c = data.value(m);
        const double d = data.velocity(m) * model.weight(m);
        y += b * (c * integrate_product(kn.sine_terms(), km.cosine_terms(), T) -
                  d * integrate_product(kn.sine_terms(), km.sine_terms(), T));
        yt += b * (c * integrate_product(kn.cosine_terms(), km.cosine_terms(), T) -
                   d * integrate_product(kn.cosine_terms(), km.sine_terms(), T));
      }
      out.pos(n) += model.weight(n) * y;
      out.vel(n) += yt;
    }
    return out;
  }
  const auto& sampled = std::get<SampledControl>(u);
  check_sampled(sampled, model.N);
  require(std::abs(sampled.horizon() - T) <= 1e-9 * std::max(1.0, T), "wave_forward: control horizon differs from T");
  const Eigen::MatrixXd states = wave_trajectory(model, y0, sampled);
  return WaveState::from_stacked(states.col(states.cols() - 1));
}

Eigen::MatrixXd heat_trajectory(const HeatModel& model, const HeatState& y0, const SampledControl& u) {
  check_sampled(u, model.N);
  require(y0.coeffs.size() == model.N, "heat_trajectory: truncation mismatch");
  return trajectory(model, y0.coeffs, u);
}

Eigen::MatrixXd wave_trajectory(const WaveModel& model, const WaveState& y0, const SampledControl& u) {
  check_sampled(u, model.N);
  require(y0.pos.size() == model.N && y0.vel.size() == model.N, "wave_trajectory: truncation mismatch");
  for (const auto& k : model.kernels) k.check_horizon(u.horizon());
  return trajectory(model, y0.stacked(), u);
}

Eigen::VectorXd control_at(const HeatModel& model, const ModalControl& u, double t, double T) {
  return model.overlap_sqrt * heat_adjoint(u.datum, t, T);
}

Eigen::VectorXd control_at(const WaveModel& model, const ModalControl& u, double t, double T) {
  return model.overlap_sqrt * wave_adjoint_values(model, AdjointWaveData::from_stacked(u.datum), t, T);
}

namespace {

template <class Model>
SampledControl sample_modal(const Model& model, const ModalControl& u, double T, int intervals) {
  require(intervals >= 2 && intervals % 2 == 0, "sample_control: need an even interval count >= 2");
  SampledControl out{T / intervals, Eigen::MatrixXd(model.N, intervals + 1)};
  for (int k = 0; k <= intervals; ++k) out.values.col(k) = control_at(model, u, std::min(T, k * out.dt), T);
  return out;
}

}  // namespace

SampledControl sample_control(const HeatModel& model, const ModalControl& u, double T, int intervals) {
  return sample_modal(model, u, T, intervals);
}

SampledControl sample_control(const WaveModel& model, const ModalControl& u, double T, int intervals) {
  return sample_modal(model, u, T, intervals);
}

Eigen::VectorXd quadratic_hold(const Eigen::VectorXd& f0, const Eigen::VectorXd& f1, const Eigen::VectorXd& f2,
                               double h, double s) {
  const double l0 = (s - h) * (s - 2 * h) / (2 * h * h);
  const double l1 = -s * (s - 2 * h) / (h * h);
  const double l2 = s * (s - h) / (2 * h * h);
  return l0 * f0 + l1 * f1 + l2 * f2;
}

namespace {

// Lagrange basis on nodes (0, h, 2h) written as a + b s + c s^2.
struct Quadratic {
  double a, b, c;
};

std::array<Quadratic, 3> lagrange_basis(double h) {
  return {{{1.0, -1.5 / h, 0.5 / (h * h)}, {0.0, 2.0 / h, -1.0 / (h * h)}, {0.0, -0.5 / h, 0.5 / (h * h)}}};
}

// Weights of f_i in \int_0^L K(L - s) q(s) ds, given kernel moments mom[j] = \int_0^L K(tau) tau^j.
// Substituting s = L - tau turns a + b s + c s^2 into (a + bL + cL^2) - (b + 2cL) tau + c tau^2.
std::array<double, 3> hold_weights(const std::array<Quadratic, 3>& basis, double L, const std::array<double, 3>& mom) {
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const Quadratic& q = basis[i];
    out[i] = (q.a + q.b * L + q.c * L * L) * mom[0] - (q.b + 2 * q.c * L) * mom[1] + q.c * mom[2];
  }
  return out;
}

}  // namespace

QuadraticHoldPair quadratic_hold_pair(const HeatModel& model, double dt) {
  require(dt > 0.0, "quadratic_hold_pair: dt must be positive");
  const int N = model.N;
  const auto basis = lagrange_basis(dt);
  QuadraticHoldPair out;
  Eigen::VectorXd decay_half(N), decay_full(N);
  std::array<Eigen::VectorXd, 3> wh, wf;
  for (auto& v : wh) v.resize(N);
  for (auto& v : wf) v.resize(N);
  for (int n = 0; n < N; ++n) {
    const cplx z = -model.lambda(n);
    decay_half(n) = std::exp(-model.lambda(n) * dt);
    decay_full(n) = std::exp(-model.lambda(n) * 2 * dt);
    for (double L : {dt, 2 * dt}) {
      const std::array<double, 3> mom = {exp_moment(0, z, L).real(), exp_moment(1, z, L).real(),
                                         exp_moment(2, z, L).real()};
      const auto w = hold_weights(basis, L, mom);
      for (int i = 0; i < 3; ++i) (L == dt ? wh : wf)[i](n) = w[i];
    }
  }
  out.half_transition = decay_half.asDiagonal().toDenseMatrix();
  out.full_transition = decay_full.asDiagonal().toDenseMatrix();
  for (int i = 0; i < 3; ++i) {
    out.half[i] = wh[i].asDiagonal() * model.overlap_sqrt;
    out.full[i] = wf[i].asDiagonal() * model.overlap_sqrt;
  }
  return out;
}

QuadraticHoldPair quadratic_hold_pair(const WaveModel& model, double dt) {
  require(dt > 0.0, "quadratic_hold_pair: dt must be positive");
  const int N = model.N;
  const auto basis = lagrange_basis(dt);
  QuadraticHoldPair out;
  out.half_transition = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  out.full_transition = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  std::array<Eigen::VectorXd, 3> ph, vh, pf, vf;
  for (auto* arr : {&ph, &vh, &pf, &vf})
    for (auto& v : *arr) v.resize(N);
  for (int n = 0; n < N; ++n) {
    const OscillatorKernel& k = model.kernels[n];
    k.check_horizon(2 * dt);
    const double w = model.weight(n);
    for (double L : {dt, 2 * dt}) {
      Eigen::MatrixXd& tr = L == dt ? out.half_transition : out.full_transition;
      const double C = k.cosine(L);
      const double S = k.sine(L);
      tr(n, n) = C;
      tr(n, N + n) = w * S;
      tr(N + n, n) = -k.kappa() * S / w;
      tr(N + n, N + n) = C;
      std::array<double, 3> smom{}, cmom{};
      for (int j = 0; j < 3; ++j) {
        smom[j] = integrate_terms(k.sine_terms(), L, j);
        cmom[j] = integrate_terms(k.cosine_terms(), L, j);
      }
      const auto ws = hold_weights(basis, L, smom);
      const auto wc = hold_weights(basis, L, cmom);
      for (int i = 0; i < 3; ++i) {
        (L == dt ? ph : pf)[i](n) = w * ws[i];
        (L == dt ? vh : vf)[i](n) = wc[i];
      }
    }
  }
  for (int i = 0; i < 3; ++i) {
    out.half[i].resize(2 * N, N);
    out.full[i].resize(2 * N, N);
    out.half[i] << ph[i].asDiagonal() * model.overlap_sqrt, vh[i].asDiagonal() * model.overlap_sqrt;
    out.full[i] << pf[i].asDiagonal() * model.overlap_sqrt, vf[i].asDiagonal() * model.overlap_sqrt;
  }
  return out;
}

}  // namespace codimctl
