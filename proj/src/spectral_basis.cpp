#include "codimctl/spectral_basis.hpp"

#include <numbers>

#include "codimctl/quadrature.hpp"

namespace codimctl {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// Gauss–Legendre over [lo, hi] with enough panels that each spans at most half an oscillation of e_N.
Eigen::VectorXd project_smooth(const std::function<double(double)>& f, double lo, double hi, int N) {
  static const GaussLegendreRule<double> rule = gauss_legendre<double>(20);
  const int panels = std::max(8, 2 * N);
  Eigen::VectorXd coeffs(N);
  for (int n = 1; n <= N; ++n) {
    auto integrand = [&](double x) { return f(x) * kSqrt2 * std::sin(n * kPi * x); };
    coeffs(n - 1) = composite_gauss_legendre<double>(integrand, lo, hi, panels, rule, 0.0);
  }
  return coeffs;
}

}  // namespace

double evaluate(const FunctionDescriptor& f, double x) {
  return std::visit(
      Overloaded{
          [&](const PureMode& p) { return p.amplitude * std::sin(p.k * kPi * x); },
          [&](const Bump& b) {
            const double s = (x - b.center) / b.half_width;
            if (std::abs(s) >= 1.0) return 0.0;
            const double t = 1.0 - s * s;
            return b.height * t * t;
          },
          [&](const Step& s) { return (x >= s.lo && x <= s.hi) ? s.height : 0.0; },
          [&](const Parabola&) { return x * (1.0 - x); },
          [&](const Samples& s) {
            const int last = static_cast<int>(s.values.size()) - 1;
            const double pos = std::clamp(x, 0.0, 1.0) * last;
            const int j = std::min(static_cast<int>(pos), last - 1);
            const double frac = pos - j;
            return (1.0 - frac) * s.values[j] + frac * s.values[j + 1];
          },
      },
      f);
}

Eigen::VectorXd project_function(const FunctionDescriptor& f, int N) {
  require(N >= 1, "project_function: truncation order must be >= 1");
  return std::visit(
      Overloaded{
          [&](const PureMode& p) -> Eigen::VectorXd {
            require(p.k >= 1, "project_function: mode index must be >= 1");
            Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
            if (p.k <= N) c(p.k - 1) = p.amplitude / kSqrt2;
            return c;
          },
          [&](const Bump& b) -> Eigen::VectorXd {
            require(b.half_width > 0.0, "project_function: bump half width must be positive");
            const double lo = std::max(0.0, b.center - b.half_width);
            const double hi = std::min(1.0, b.center + b.half_width);
            require(lo < hi, "project_function: bump support misses (0, 1)");
            return project_smooth([&](double x) { return evaluate(b, x); }, lo, hi, N);
          },
          [&](const Step& s) -> Eigen::VectorXd {
            require(0.0 <= s.lo && s.lo < s.hi && s.hi <= 1.0, "project_function: step needs 0 <= lo < hi <= 1");
            Eigen::VectorXd c(N);
            for (int n = 1; n <= N; ++n) {
              const double w = n * kPi;
              c(n - 1) = s.height * kSqrt2 * (std::cos(w * s.lo) - std::cos(w * s.hi)) / w;
            }
            return c;
          },
          [&](const Parabola&) -> Eigen::VectorXd {
            return project_smooth([](double x) { return x * (1.0 - x); }, 0.0, 1.0, N);
          },
          [&](const Samples& s) -> Eigen::VectorXd {
            const int count = static_cast<int>(s.values.size());
            require(count >= required_samples(N) && count % 2 == 1,
                    "project_function: need an odd sample count >= 8N+1");
            const int intervals = count - 1;
            const Eigen::VectorXd w = simpson_weights(intervals, 1.0 / intervals);
            Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
            for (int j = 0; j <= intervals; ++j) {
              const double x = static_cast<double>(j) / intervals;
              for (int n = 1; n <= N; ++n) c(n - 1) += w(j) * s.values[j] * kSqrt2 * std::sin(n * kPi * x);
            }
            return c;
          },
      },
      f);
}

}  // namespace codimctl
