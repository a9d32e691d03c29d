#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>

#include "fpcross/error.hpp"

namespace fpcross {

namespace detail {

template <std::size_t M>
Eigen::MatrixXd pade_low_order(const Eigen::MatrixXd& a, const std::array<double, M>& b) {
  // U = A * sum_{odd k} b_k A^{k-1},  V = sum_{even k} b_k A^k.
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd a2 = a * a;
  Eigen::MatrixXd power = ident;
  Eigen::MatrixXd u_inner = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k + 1 < M; k += 2) {
    v += b[k] * power;
    u_inner += b[k + 1] * power;
    power = power * a2;
  }
  const Eigen::MatrixXd u = a * u_inner;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace detail

/// exp(m) by scaling and squaring with a diagonal Pade approximant whose
/// degree (3, 5, 7, 9 or 13) is picked from the 1-norm.
inline Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m) {
  detail::require(m.rows() == m.cols(), "matrix_exponential: matrix must be square");
  if (!m.allFinite()) throw NonFiniteError("matrix_exponential: matrix has nonfinite entries");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();

  static constexpr std::array<double, 4> b3{120.0, 60.0, 12.0, 1.0};
  static constexpr std::array<double, 6> b5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  static constexpr std::array<double, 8> b7{17297280.0, 8648640.0, 1995840.0, 277200.0,
                                            25200.0,    1512.0,    56.0,      1.0};
  static constexpr std::array<double, 10> b9{17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                                             2162160.0,     110880.0,     3960.0,       90.0,        1.0};
  if (norm1 <= 1.495585217958292e-2) return detail::pade_low_order(m, b3);
  if (norm1 <= 2.539398330063230e-1) return detail::pade_low_order(m, b5);
  if (norm1 <= 9.504178996162932e-1) return detail::pade_low_order(m, b7);
  if (norm1 <= 2.097847961257068e0) return detail::pade_low_order(m, b9);

  static constexpr double theta13 = 5.371920351148152;
  static constexpr std::array<double, 14> b{64764752532480000.0,
                                            32382376266240000.0,
                                            7771770303897600.0,
                                            1187353796428800.0,
                                            129060195264000.0,
                                            10559470521600.0,
                                            670442572800.0,
                                            33522128640.0,
                                            1323241920.0,
                                            40840800.0,
                                            960960.0,
                                            16380.0,
                                            182.0,
                                            1.0};
  const int squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  const Eigen::MatrixXd a = m / std::ldexp(1.0, squarings);
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd a2 = a * a;
  const Eigen::MatrixXd a4 = a2 * a2;
  const Eigen::MatrixXd a6 = a4 * a2;
  const Eigen::MatrixXd u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
  const Eigen::MatrixXd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
  Eigen::MatrixXd x = (v - u).partialPivLu().solve(v + u);
  for (int s = 0; s < squarings; ++s) x = x * x;
  return x;
}

}  // namespace fpcross
