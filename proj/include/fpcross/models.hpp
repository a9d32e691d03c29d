#pragma once

// Benchmark problems: multivariate Ornstein-Uhlenbeck processes with their
// analytic densities, and the two-bead dumbbell polymer model with Kramer
// stress observables.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "fpcross/cheb.hpp"
#include "fpcross/cross.hpp"
#include "fpcross/expm.hpp"
#include "fpcross/solver.hpp"
#include "fpcross/tt.hpp"

namespace fpcross {

/// (2 pi s)^{-d/2} exp(-|x|^2 / (2 s)).
inline DensityMap gaussian_ic(double s, Index d) {
  detail::require(s > 0.0, "gaussian_ic: variance must be positive");
  const double norm = std::pow(2.0 * std::numbers::pi * s, -0.5 * static_cast<double>(d));
  return [s, d, norm](const MatrixXd& x) -> VectorXd {
    detail::require(x.cols() == d, "gaussian_ic: points have the wrong dimension");
    return norm * (-x.rowwise().squaredNorm().array() / (2.0 * s)).exp();
  };
}

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck: f(x) = A (mu - x), scalar diffusion D_c.

struct OUParams {
  MatrixXd a = MatrixXd::Identity(1, 1);
  VectorXd mu = VectorXd::Zero(1);
  double diffusion = 0.5;
  Interval box{-5.0, 5.0};
  double s = 1.0;  ///< variance of the Gaussian initial density

  Index dims() const { return a.rows(); }

  void validate() const {
    detail::require(a.rows() == a.cols(), "OUParams: A must be square");
    detail::require(mu.size() == a.rows(), "OUParams: mu must match A");
    detail::require(std::abs(a.determinant()) > 0.0, "OUParams: A must be invertible");
    detail::require(diffusion >= 0.0 && s > 0.0, "OUParams: need D_c >= 0 and s > 0");
  }
};

inline OUParams ou1d_params() { return OUParams{}; }

inline OUParams ou3d_params() {
  OUParams p;
  p.a.resize(3, 3);
  p.a << 1.5, 1.0, 0.0,  //
      0.0, 1.0, 0.0,     //
      0.5, 0.3, 1.0;
  p.mu = VectorXd::Zero(3);
  return p;
}

inline OUParams ou5d_params() {
  OUParams p;
  p.a = MatrixXd::Identity(5, 5);
  p.a(0, 0) = 1.5;
  p.a(4, 0) = 0.5;
  p.a(4, 1) = 0.3;
  p.a(4, 2) = 0.2;
  p.mu = VectorXd::Zero(5);
  return p;
}

inline DriftMap ou_drift(const OUParams& prm) {
  return [a = prm.a, mu = prm.mu](const MatrixXd& x, double) -> MatrixXd {
    // Rows are points: f^T = (mu - x)^T A^T.
    return (-(x.rowwise() - mu.transpose())) * a.transpose();
  };
}

inline DivergenceMap ou_div_terms(const OUParams& prm) {
  const double tr = -prm.a.trace();
  return [tr](const MatrixXd& x, double) -> VectorXd { return VectorXd::Constant(x.rows(), tr); };
}

/// 1-D transition variance: D_c (1 - e^{-2 A t}) / A.
inline double ou_sigma_1d(double t, double a, double diffusion) {
  return (1.0 - std::exp(-2.0 * a * t)) * (2.0 * diffusion) / (2.0 * a);
}

/// 1-D density at time t started from the Gaussian initial density (mu = 0):
/// a centered normal with variance Sigma(t) + s e^{-2 A t}.
inline VectorXd ou_analytic_1d(const OUParams& prm, const VectorXd& x, double t) {
  detail::require(prm.dims() == 1, "ou_analytic_1d: one-dimensional parameters required");
  const double a = prm.a(0, 0);
  const double var = ou_sigma_1d(t, a, prm.diffusion) + prm.s * std::exp(-2.0 * a * t);
  return (-(x.array() - prm.mu[0]).square() / (2.0 * var)).exp() / std::sqrt(2.0 * std::numbers::pi * var);
}

/// Solves A W + W A^T = 2 D_c I through the Kronecker system
/// (I (x) A + A (x) I) vec(W) = vec(2 D_c I).
inline MatrixXd lyapunov_solve(const MatrixXd& a, double diffusion) {
  detail::require(a.rows() == a.cols(), "lyapunov_solve: A must be square");
  const Index d = a.rows();
  MatrixXd k = MatrixXd::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      // vec index of W(i, j) is i + d * j.
      for (Index m = 0; m < d; ++m) {
        k(i + d * j, m + d * j) += a(i, m);  // (A W)(i, j) = sum_m A(i, m) W(m, j)
        k(i + d * j, i + d * m) += a(j, m);  // (W A^T)(i, j) = sum_m W(i, m) A(j, m)
      }
    }
  const VectorXd rhs = Eigen::Map<const VectorXd>(MatrixXd((2.0 * diffusion) * MatrixXd::Identity(d, d)).data(), d * d);
  Eigen::FullPivLU<MatrixXd> lu(k);
  if (!lu.isInvertible()) throw std::runtime_error("lyapunov_solve: the Kronecker system is singular");
  const VectorXd w = lu.solve(rhs);
  const MatrixXd wm = Eigen::Map<const MatrixXd>(w.data(), d, d);
  return (wm + wm.transpose()) / 2.0;
}

/// Stationary density exp(-1/2 (x-mu)^T W^{-1} (x-mu)) / sqrt((2 pi)^d det W).
inline DensityMap ou_stationary(const OUParams& prm) {
  const MatrixXd w = lyapunov_solve(prm.a, prm.diffusion);
  Eigen::LLT<MatrixXd> llt(w);
  if (llt.info() != Eigen::Success) throw std::runtime_error("ou_stationary: W is not positive definite");
  const Index d = prm.dims();
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double norm = std::exp(-0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + logdet));
  return [llt, mu = prm.mu, norm, d](const MatrixXd& x) -> VectorXd {
    detail::require(x.cols() == d, "ou_stationary: points have the wrong dimension");
    const MatrixXd centered = (x.rowwise() - mu.transpose()).transpose();  // d x P
    const MatrixXd z = llt.matrixL().solve(centered);
    return norm * (-0.5 * z.colwise().squaredNorm().array()).exp().transpose();
  };
}

/// Mean at time t of the process started at x0.
inline VectorXd ou_mean(double t, const VectorXd& x0, const OUParams& prm) {
  const MatrixXd e = matrix_exponential(-t * prm.a);
  return e * x0 + (MatrixXd::Identity(prm.dims(), prm.dims()) - e) * prm.mu;
}

namespace detail {

inline MatrixXd adaptive_simpson(const std::function<MatrixXd(double)>& g, double a, double b, const MatrixXd& fa,
                                 const MatrixXd& fm, const MatrixXd& fb, const MatrixXd& whole, double tol, int depth) {
  const double m = (a + b) / 2.0;
  const MatrixXd flm = g((a + m) / 2.0);
  const MatrixXd frm = g((m + b) / 2.0);
  const MatrixXd left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const MatrixXd right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const MatrixXd delta = left + right - whole;
  if (depth <= 0 || delta.cwiseAbs().maxCoeff() <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace detail

/// Transition covariance Sigma(t) = int_0^t e^{A(s-t)} S S^T e^{A^T(s-t)} ds
/// with S S^T = 2 D_c I, by adaptive Simpson quadrature.
inline MatrixXd ou_covariance_quad(double t, const OUParams& prm, double tol = 1e-13) {
  const Index d = prm.dims();
  if (t == 0.0) return MatrixXd::Zero(d, d);
  const auto g = [&](double s) -> MatrixXd {
    const MatrixXd e = matrix_exponential((s - t) * prm.a);
    return (2.0 * prm.diffusion) * e * e.transpose();
  };
  const MatrixXd fa = g(0.0);
  const MatrixXd fm = g(t / 2.0);
  const MatrixXd fb = g(t);
  const MatrixXd whole = t / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson(g, 0.0, t, fa, fm, fb, whole, tol, 40);
}

/// Transition density rho(x, t | x0): normal with mean ou_mean and covariance
/// ou_covariance_quad.
inline VectorXd ou_transitional(const OUParams& prm, const MatrixXd& x, double t, const VectorXd& x0) {
  const Index d = prm.dims();
  const VectorXd mean = ou_mean(t, x0, prm);
  Eigen::LLT<MatrixXd> llt(ou_covariance_quad(t, prm));
  if (llt.info() != Eigen::Success) throw std::runtime_error("ou_transitional: covariance is not positive definite");
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double norm = std::exp(-0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + logdet));
  const MatrixXd z = llt.matrixL().solve((x.rowwise() - mean.transpose()).transpose());
  return norm * (-0.5 * z.colwise().squaredNorm().array()).exp().transpose();
}

inline ProblemDef ou_problem(const OUParams& prm, double horizon) {
  prm.validate();
  ProblemDef p;
  p.dim = prm.dims();
  p.drift = ou_drift(prm);
  p.drift_div = ou_div_terms(prm);
  p.rho0 = gaussian_ic(prm.s, prm.dims());
  p.diffusion = prm.diffusion;
  p.domain.assign(static_cast<std::size_t>(prm.dims()), prm.box);
  p.horizon = horizon;
  return p;
}

// ---------------------------------------------------------------------------
// Dumbbell: f = beta (x_2, 0, 0) - grad(phi) / 2 with
// phi = |x|^2 / 2 + (alpha / p^3) exp(-|x|^2 / (2 p^2)).

struct DumbbellParams {
  double alpha = 0.1;
  double beta = 1.0;
  double p = 0.5;
  double diffusion = 0.5;
  Interval box{-10.0, 10.0};
  double horizon = 10.0;
  double s = 1.0;

  void validate() const { detail::require(p > 0.0, "DumbbellParams: p must be positive"); }

  /// exp(-|x|^2 / (2 p^2)) per row.
  VectorXd bump(const MatrixXd& x) const { return (-x.rowwise().squaredNorm().array() / (2.0 * p * p)).exp(); }
};

inline DriftMap dumbbell_drift(const DumbbellParams& prm) {
  return [prm](const MatrixXd& x, double) -> MatrixXd {
    detail::require(x.cols() == 3, "dumbbell_drift: points must be 3-dimensional");
    const VectorXd scale = (prm.alpha / (2.0 * std::pow(prm.p, 5))) * prm.bump(x).array() - 0.5;
    MatrixXd f = x.array().colwise() * scale.array();
    f.col(0) += prm.beta * x.col(1);
    return f;
  };
}

inline DivergenceMap dumbbell_div_terms(const DumbbellParams& prm) {
  return [prm](const MatrixXd& x, double) -> VectorXd {
    detail::require(x.cols() == 3, "dumbbell_div_terms: points must be 3-dimensional");
    const VectorXd e = prm.bump(x);
    const double c5 = prm.alpha / (2.0 * std::pow(prm.p, 5));
    const double c7 = prm.alpha / (2.0 * std::pow(prm.p, 7));
    return (3.0 * (c5 * e.array() - 0.5) - c7 * e.array() * x.rowwise().squaredNorm().array()).matrix();
  };
}

inline ProblemDef dumbbell_problem(const DumbbellParams& prm) {
  prm.validate();
  ProblemDef p;
  p.dim = 3;
  p.drift = dumbbell_drift(prm);
  p.drift_div = dumbbell_div_terms(prm);
  p.rho0 = gaussian_ic(prm.s, 3);
  p.diffusion = prm.diffusion;
  p.domain.assign(3, prm.box);
  p.horizon = prm.horizon;
  return p;
}

struct KramerObservables {
  double psi = 0.0;
  double eta = 0.0;
};

namespace detail {

inline VectorXd tt_elements(const TTTensor& t, const IndexBatch& idx) {
  VectorXd out(idx.rows());
  for (Index p = 0; p < idx.rows(); ++p) out[p] = tt_element(t, std::span<const Index>(idx.row(p).data(), static_cast<std::size_t>(idx.cols())));
  return out;
}

}  // namespace detail

/// psi = int rho (x_1 dphi/dx_1 - x_2 dphi/dx_2) / beta^2 and
/// eta = int rho x_1 dphi/dx_2 / beta, where dphi/dx_k = x_k (1 - alpha/p^5 e^{-|x|^2/(2p^2)}).
/// Each integrand is assembled on the grid by cross approximation (nodal
/// density times the analytic weight) and integrated by Clenshaw-Curtis.
inline KramerObservables kramer_observables(const TTTensor& rho, const ChebGrid& grid, const DumbbellParams& prm,
                                            const CrossConfig& cfg) {
  if (rho.mode_sizes() != grid.sizes() || grid.dims() != 3)
    throw std::invalid_argument("kramer_observables: density must live on a 3-D grid");
  const double c = prm.alpha / std::pow(prm.p, 5);
  auto integrate = [&](auto weight) {
    const BatchOracle oracle = [&](const IndexBatch& idx) -> VectorXd {
      const MatrixXd x = grid.points(idx);
      const VectorXd g = (1.0 - c * prm.bump(x).array()).matrix();
      return (detail::tt_elements(rho, idx).array() * weight(x).array() * g.array()).matrix();
    };
    const CrossResult res = cross_approximate(oracle, rho, cfg);
    return tt_integrate(res.tensor, grid);
  };
  KramerObservables out;
  out.psi = integrate([](const MatrixXd& x) -> VectorXd {
              return (x.col(0).array().square() - x.col(1).array().square()).matrix();
            }) /
            (prm.beta * prm.beta);
  out.eta = integrate([](const MatrixXd& x) -> VectorXd { return (x.col(0).array() * x.col(1).array()).matrix(); }) /
            prm.beta;
  return out;
}

}  // namespace fpcross
