#include "codimctl/gramian.hpp"

#include "codimctl/errors.hpp"
#include "codimctl/quadrature.hpp"

namespace codimctl {

std::string to_string(SystemKind kind) { return kind == SystemKind::Heat ? "heat" : "wave"; }

SystemKind system_kind_from_string(const std::string& name) {
  if (name == "heat") return SystemKind::Heat;
  if (name == "wave") return SystemKind::Wave;
  throw ValidationError("unknown system kind '" + name + "' (expected heat or wave)");
}

Eigen::MatrixXd heat_gramian(const HeatModel& model, double T) {
  require(T > 0.0 && std::isfinite(T), "heat gramian: horizon must be positive");
  const int N = model.N;
  Eigen::MatrixXd G(N, N);
  for (int m = 0; m < N; ++m) {
    for (int n = m; n < N; ++n) {
      const double s = model.lambda(m) + model.lambda(n);
      G(m, n) = model.overlap(m, n) * (-std::expm1(-s * T)) / s;
      G(n, m) = G(m, n);
    }
  }
  return G;
}

Eigen::MatrixXd wave_gramian(const WaveModel& model, double T) {
  require(T > 0.0 && std::isfinite(T), "wave gramian: horizon must be positive");
  for (const auto& k : model.kernels) k.check_horizon(T);
  const int N = model.N;
  Eigen::MatrixXd G(2 * N, 2 * N);
  // Observed trace of datum (c_m, d_m) in sigma = T - s: c_m C_m(sigma) - d_m w_m S_m(sigma).
  for (int m = 0; m < N; ++m) {
    const OscillatorKernel& km = model.kernels[m];
    for (int n = m; n < N; ++n) {
      const OscillatorKernel& kn = model.kernels[n];
      const double b = model.overlap(m, n);
      const double wm = model.weight(m);
      const double wn = model.weight(n);
      const double cc = b * integrate_product(km.cosine_terms(), kn.cosine_terms(), T);
      const double cs = -b * wn * integrate_product(km.cosine_terms(), kn.sine_terms(), T);
      const double sc = -b * wm * integrate_product(km.sine_terms(), kn.cosine_terms(), T);
      const double ss = b * wm * wn * integrate_product(km.sine_terms(), kn.sine_terms(), T);
      G(m, n) = G(n, m) = cc;
      G(m, N + n) = G(N + n, m) = cs;
      G(N + m, n) = G(n, N + m) = sc;
      G(N + m, N + n) = G(N + n, N + m) = ss;
    }
  }
  return G;
}

GramianMatrix assemble_heat_gramian(int N, double T, const ControlRegion& region) {
  const HeatModel model(N, region);
  return {SystemKind::Heat, N, T, region, 0.0, heat_gramian(model, T)};
}

GramianMatrix assemble_wave_gramian(int N, double T, const ControlRegion& region, double c) {
  const WaveModel model(N, region, c);
  return {SystemKind::Wave, N, T, region, c, wave_gramian(model, T)};
}

GramianMatrix assemble_gramian(SystemKind kind, int N, double T, const ControlRegion& region, double c) {
  return kind == SystemKind::Heat ? assemble_heat_gramian(N, T, region) : assemble_wave_gramian(N, T, region, c);
}

void check_gramian_invariants(const GramianMatrix& G) {
  const Eigen::MatrixXd& M = G.entries;
  const double scale = M.cwiseAbs().maxCoeff();
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1e-300)) {
    throw NumericalError("gramian is not symmetric", {{"asymmetry", asym}, {"scale", scale}});
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  if (lo < -1e-10 * std::max(hi, 0.0)) {
    throw NumericalError("gramian is not positive semidefinite", {{"min_eigenvalue", lo}, {"max_eigenvalue", hi}});
  }
}

Eigen::MatrixXd gramian_quadrature_oracle(SystemKind kind, int N, double T, const ControlRegion& region, double c,
                                          int panels) {
  require(panels >= 8, "gramian_quadrature_oracle: need at least 8 panels");
  require(T > 0.0, "gramian_quadrature_oracle: horizon must be positive");
  static const GaussLegendreRule<double> rule = gauss_legendre<double>(16);
  const Eigen::MatrixXd B = overlap_matrix(region, N);
  const int dim = kind == SystemKind::Heat ? N : 2 * N;

  // Modal values of the adjoint solutions with unit data, one column per datum.
  std::function<Eigen::MatrixXd(double)> values;
  if (kind == SystemKind::Heat) {
    values = [N, T](double s) {
      Eigen::MatrixXd V = Eigen::MatrixXd::Zero(N, N);
      const Eigen::VectorXd decay = heat_adjoint(Eigen::VectorXd::Ones(N), s, T);
      V.diagonal() = decay;
      return V;
    };
  } else {
    values = [N, T, c](double s) {
      Eigen::MatrixXd V = Eigen::MatrixXd::Zero(N, 2 * N);
      for (int k = 0; k < N; ++k) {
        AdjointWaveData unit{Eigen::VectorXd::Zero(N), Eigen::VectorXd::Zero(N)};
        unit.value(k) = 1.0;
        V(k, k) = wave_adjoint(unit, s, T, c).value(k);
        unit.value(k) = 0.0;
        unit.velocity(k) = 1.0;
        V(k, N + k) = wave_adjoint(unit, s, T, c).value(k);
      }
      return V;
    };
  }
  auto integrand = [&](double s) -> Eigen::MatrixXd {
    const Eigen::MatrixXd V = values(s);
    return V.transpose() * B * V;
  };

  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd previous = composite_gauss_legendre<Eigen::MatrixXd>(integrand, 0.0, T, panels, rule, zero);
  constexpr int kMaxPanels = 1 << 14;
  for (int p = 2 * panels; p <= kMaxPanels; p *= 2) {
    Eigen::MatrixXd current = composite_gauss_legendre<Eigen::MatrixXd>(integrand, 0.0, T, p, rule, zero);
    const double diff = (current - previous).cwiseAbs().maxCoeff();
    const double scale = std::max(current.cwiseAbs().maxCoeff(), 1e-300);
    if (diff <= 1e-12 * scale) return current;
    previous = std::move(current);
  }
  throw NumericalError("gramian_quadrature_oracle: no convergence under panel doubling",
                       {{"max_panels", kMaxPanels}});
}

double control_norm(const HeatModel& model, const ModalControl& u, double T) {
  return std::sqrt(std::max(0.0, u.datum.dot(heat_gramian(model, T) * u.datum)));
}

double control_norm(const WaveModel& model, const ModalControl& u, double T) {
  return std::sqrt(std::max(0.0, u.datum.dot(wave_gramian(model, T) * u.datum)));
}

}  // namespace codimctl
