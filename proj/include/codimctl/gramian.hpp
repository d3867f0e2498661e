#pragma once

// Truncated controllability Gramians of the heat and wave systems.
//
// The Gramian acts on adjoint data: its quadratic form v^T G v equals
// \int_0^T |chi_omega phi(s)|^2_{L^2} ds for the adjoint solution phi generated by v. Heat data are
// phi_T coefficients (N x N); wave data are stacked AdjointWaveData (2N x 2N). Applying the HUM
// control u = B^* phi steers 0 to G v (heat) or pairing_map(G v) (wave).

#include <string>

#include <Eigen/Dense>

#include "codimctl/propagators.hpp"
#include "codimctl/spectral_basis.hpp"

namespace codimctl {

enum class SystemKind { Heat, Wave };

std::string to_string(SystemKind kind);
SystemKind system_kind_from_string(const std::string& name);

struct GramianMatrix {
  SystemKind kind = SystemKind::Heat;
  int N = 0;
  double T = 0.0;
  ControlRegion region;
  double potential = 0.0;
  Eigen::MatrixXd entries;

  Eigen::Index dim() const { return entries.rows(); }
};

Eigen::MatrixXd heat_gramian(const HeatModel& model, double T);
Eigen::MatrixXd wave_gramian(const WaveModel& model, double T);

GramianMatrix assemble_heat_gramian(int N, double T, const ControlRegion& region);
GramianMatrix assemble_wave_gramian(int N, double T, const ControlRegion& region, double c);
GramianMatrix assemble_gramian(SystemKind kind, int N, double T, const ControlRegion& region, double c);

/// Throws NumericalError unless the matrix is symmetric (1e-12 relative) and PSD
/// (smallest eigenvalue >= -1e-10 * largest).
void check_gramian_invariants(const GramianMatrix& G);

/// Independent assembly by composite Gauss–Legendre in time (order 16 per panel), integrating
/// <chi_omega phi_i(s), phi_j(s)> with phi_k evaluated by the adjoint propagators. Panels double
/// from `panels` until successive results agree to 1e-12 relative; otherwise NumericalError.
Eigen::MatrixXd gramian_quadrature_oracle(SystemKind kind, int N, double T, const ControlRegion& region, double c,
                                          int panels = 8);

/// L^2(0, T; L^2(omega)) norm of a modal control, sqrt(datum^T G datum).
double control_norm(const HeatModel& model, const ModalControl& u, double T);
double control_norm(const WaveModel& model, const ModalControl& u, double T);

}  // namespace codimctl
