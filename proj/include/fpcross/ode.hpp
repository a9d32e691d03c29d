#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

#include "fpcross/error.hpp"

namespace fpcross {

/// Right-hand side of a batched ODE system: (Y, t) -> dY/dt, where each row
/// of Y is one independent trajectory.
using BatchRhs = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, double)>;

/// One classical Runge-Kutta 4 step over the signed interval [t1, t2].
/// t2 < t1 integrates backward in time.
inline Eigen::MatrixXd rk4_step(const BatchRhs& rhs, double t1, double t2, const Eigen::MatrixXd& y0) {
  const double h = t2 - t1;
  auto eval = [&](const Eigen::MatrixXd& y, double t, const char* stage) {
    Eigen::MatrixXd k = rhs(y, t);
    if (k.rows() != y.rows() || k.cols() != y.cols())
      throw std::invalid_argument("rk4_step: rhs returned a matrix of the wrong shape");
    if (!k.allFinite()) throw NonFiniteError(std::string("rk4_step: nonfinite rhs in stage ") + stage);
    return k;
  };
  const Eigen::MatrixXd k1 = eval(y0, t1, "1");
  const Eigen::MatrixXd k2 = eval(y0 + (h / 2.0) * k1, t1 + h / 2.0, "2");
  const Eigen::MatrixXd k3 = eval(y0 + (h / 2.0) * k2, t1 + h / 2.0, "3");
  const Eigen::MatrixXd k4 = eval(y0 + h * k3, t1 + h, "4");
  return y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace fpcross
