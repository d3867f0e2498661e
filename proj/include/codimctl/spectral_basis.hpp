#pragma once

// Dirichlet Laplacian eigenbasis on (0, 1): e_n(x) = sqrt(2) sin(n pi x), lambda_n = (n pi)^2.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "codimctl/errors.hpp"

namespace codimctl {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
Scalar eigenvalue(int n) {
  require(n >= 1, "eigenvalue: mode index must be >= 1");
  const Scalar k = Scalar(n) * std::numbers::pi_v<Scalar>;
  return k * k;
}

/// One eigenmode together with its response to a constant potential c, i.e. the operator
/// -d^2/dx^2 + c. The effective frequency is sqrt(lambda + c); below zero the mode is hyperbolic.
template <typename Scalar = double>
struct EigenMode {
  int n = 1;

  Scalar lambda() const { return eigenvalue<Scalar>(n); }
  Scalar shifted(Scalar c) const { return lambda() + c; }
  bool hyperbolic(Scalar c) const { return shifted(c) < Scalar(0); }
  Scalar freq(Scalar c = Scalar(0)) const {
    const Scalar s = shifted(c);
    return s > Scalar(0) ? std::sqrt(s) : Scalar(0);
  }
};

/// Control subinterval omega = (a, b) of (0, 1).
struct ControlRegion {
  double a = 0.0;
  double b = 1.0;

  ControlRegion() = default;
  ControlRegion(double lo, double hi) : a(lo), b(hi) {
    require(std::isfinite(lo) && std::isfinite(hi), "ControlRegion: endpoints must be finite");
    require(0.0 <= lo && lo < hi && hi <= 1.0, "ControlRegion: need 0 <= a < b <= 1");
  }

  double length() const { return b - a; }
  /// Minimal time for every characteristic of the 1D wave equation to cross omega.
  double gcc_time() const { return 2.0 * std::max(a, 1.0 - b); }
  bool contains(const ControlRegion& inner) const { return a <= inner.a && inner.b <= b; }
};

/// B_mn = \int_a^b e_m e_n dx in closed form. The diagonal uses its own formula.
template <typename Scalar = double>
Scalar overlap_entry(int m, int n, Scalar a, Scalar b) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  if (m == n) {
    const Scalar w = Scalar(2 * n) * pi;
    return (b - a) - (std::sin(w * b) - std::sin(w * a)) / w;
  }
  const Scalar d = Scalar(m - n) * pi;
  const Scalar s = Scalar(m + n) * pi;
  return (std::sin(d * b) - std::sin(d * a)) / d - (std::sin(s * b) - std::sin(s * a)) / s;
}

template <typename Scalar = double>
Mat<Scalar> overlap_matrix(const ControlRegion& region, int N) {
  require(N >= 1, "overlap_matrix: truncation order must be >= 1");
  Mat<Scalar> B(N, N);
  for (int m = 1; m <= N; ++m) {
    B(m - 1, m - 1) = overlap_entry<Scalar>(m, m, Scalar(region.a), Scalar(region.b));
    for (int n = m + 1; n <= N; ++n) {
      const Scalar v = overlap_entry<Scalar>(m, n, Scalar(region.a), Scalar(region.b));
      B(m - 1, n - 1) = v;
      B(n - 1, m - 1) = v;
    }
  }
  return B;
}

// ---------------------------------------------------------------------------
// Named target functions.

/// amplitude * sin(k pi x)
struct PureMode {
  int k = 1;
  double amplitude = 1.0;
};

/// height * (1 - ((x - center)/half_width)^2)^2 on |x - center| < half_width, zero elsewhere.
struct Bump {
  double center = 0.5;
  double half_width = 0.25;
  double height = 1.0;
};

/// height on [lo, hi], zero elsewhere.
struct Step {
  double lo = 0.3;
  double hi = 0.7;
  double height = 1.0;
};

/// x (1 - x)
struct Parabola {};

/// Samples on the uniform grid x_j = j / (size - 1), endpoints included.
struct Samples {
  std::vector<double> values;
};

using FunctionDescriptor = std::variant<PureMode, Bump, Step, Parabola, Samples>;

/// Point evaluation; Samples are linearly interpolated.
double evaluate(const FunctionDescriptor& f, double x);

/// First N coefficients <f, e_n>.
Eigen::VectorXd project_function(const FunctionDescriptor& f, int N);

/// Minimum sample count accepted by project_function for truncation N.
inline int required_samples(int N) { return 8 * N + 1; }

}  // namespace codimctl
