#pragma once

// Matrix exponential by scaling and squaring with diagonal Pade approximants of degree
// 3, 5, 7, 9 or 13 (Higham, 2005).

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "codimctl/errors.hpp"

namespace codimctl {

/// Largest 1-norm accepted by expm.
inline constexpr double kExpmMaxNorm = 50.0;

namespace detail {

template <typename Scalar, std::size_t M>
void pade_odd_even(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
                   const std::array<double, M>& b,
                   Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& U,
                   Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& V) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  Matrix power = I;
  Matrix odd = Scalar(b[1]) * I;
  Matrix even = Scalar(b[0]) * I;
  for (std::size_t k = 2; k < M; k += 2) {
    power = power * A2;
    even += Scalar(b[k]) * power;
    if (k + 1 < M) odd += Scalar(b[k + 1]) * power;
  }
  U = A * odd;
  V = even;
}

}  // namespace detail

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> expm(const Eigen::MatrixBase<Derived>& input) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  require(input.rows() == input.cols(), "expm: matrix must be square");
  Matrix A = input;
  const double norm = A.cwiseAbs().colwise().sum().maxCoeff();
  require(std::isfinite(norm), "expm: matrix has non-finite entries");
  require(norm <= kExpmMaxNorm, "expm: 1-norm exceeds the supported range");

  static constexpr std::array<double, 4> b3 = {120., 60., 12., 1.};
  static constexpr std::array<double, 6> b5 = {30240., 15120., 3360., 420., 30., 1.};
  static constexpr std::array<double, 8> b7 = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
  static constexpr std::array<double, 10> b9 = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                                2162160.,     110880.,     3960.,       90.,        1.};
  static constexpr std::array<double, 14> b13 = {
      64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800., 129060195264000.,
      10559470521600.,    670442572800.,      33522128640.,      1323241920.,       40840800.,
      960960.,            16380.,             182.,              1.};

  Matrix U, V;
  int squarings = 0;
  if (norm <= 1.495585217958292e-2) {
    detail::pade_odd_even(A, b3, U, V);
  } else if (norm <= 2.539398330063230e-1) {
    detail::pade_odd_even(A, b5, U, V);
  } else if (norm <= 9.504178996162932e-1) {
    detail::pade_odd_even(A, b7, U, V);
  } else if (norm <= 2.097847961257068) {
    detail::pade_odd_even(A, b9, U, V);
  } else {
    constexpr double theta13 = 5.371920351148152;
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
    A /= std::ldexp(Scalar(1), squarings);
    detail::pade_odd_even(A, b13, U, V);
  }
  Matrix R = (V - U).partialPivLu().solve(V + U);
  for (int s = 0; s < squarings; ++s) R = R * R;
  return R;
}

}  // namespace codimctl
