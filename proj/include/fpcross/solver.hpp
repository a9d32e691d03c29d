#pragma once

// Time stepping for the Fokker-Planck equation
//
//   d rho / dt = D_c * Laplace(rho) - div(f(x, t) rho)
//
// by Strang splitting: half a step of diffusion (Kronecker-factored matrix
// exponentials applied core by core), a full convection step computed along
// characteristics and rebuilt with TT cross, and another half diffusion step.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpcross/cheb.hpp"
#include "fpcross/cross.hpp"
#include "fpcross/error.hpp"
#include "fpcross/expm.hpp"
#include "fpcross/grid.hpp"
#include "fpcross/ode.hpp"
#include "fpcross/tt.hpp"

namespace fpcross {

/// Drift f(x, t) for a batch of points: P x d -> P x d.
using DriftMap = std::function<MatrixXd(const MatrixXd&, double)>;
/// sum_k d f_k / d x_k for a batch of points: P x d -> P.
using DivergenceMap = std::function<VectorXd(const MatrixXd&, double)>;
/// Time-independent scalar field, e.g. the initial density: P x d -> P.
using DensityMap = std::function<VectorXd(const MatrixXd&)>;

struct ProblemDef {
  Index dim = 1;
  DriftMap drift;
  DivergenceMap drift_div;
  DensityMap rho0;
  double diffusion = 0.0;
  std::vector<Interval> domain;
  double horizon = 1.0;

  void validate() const {
    detail::require(dim >= 1, "ProblemDef: dim must be >= 1");
    detail::require(static_cast<Index>(domain.size()) == dim, "ProblemDef: need one interval per dimension");
    detail::require(drift && drift_div && rho0, "ProblemDef: drift, drift_div and rho0 must be set");
    detail::require(diffusion >= 0.0, "ProblemDef: diffusion must be nonnegative");
    detail::require(horizon > 0.0, "ProblemDef: horizon must be positive");
  }
};

/// Everything one solve carries between steps.
struct Stepper {
  ProblemDef problem;
  ChebGrid grid;
  Index time_points = 2;
  double h = 0.0;
  std::vector<MatrixXd> z_mats;  ///< exp((h/2) D_c D_k), boundary rows of D_k zeroed
  double eps = 1e-6;
  CrossConfig cross_cfg;
  TTTensor state;       ///< density on the grid at the current time
  TTTensor conv_guess;  ///< warm start for the next convection cross
};

struct StepInfo {
  bool cross_converged = true;
  Index cross_half_sweeps = 0;
  Index cross_evaluations = 0;
};

/// Sets up the grid, time step, initial density (by cross from a random rank-1
/// guess) and the per-dimension diffusion propagators. The cross accuracy is
/// taken from `eps`, which also drives every rounding; fibers inside the
/// cross are compressed at eps / 10 unless `cross_cfg.fiber_eps` is set.
inline Stepper build_stepper(const ProblemDef& p, const std::vector<Index>& sizes, Index time_points, double eps,
                             CrossConfig cross_cfg, std::uint64_t seed) {
  p.validate();
  detail::require(time_points >= 2, "build_stepper: need at least 2 time points");
  detail::require(eps > 0.0, "build_stepper: eps must be positive");
  detail::require(static_cast<Index>(sizes.size()) == p.dim, "build_stepper: need one grid size per dimension");

  Stepper s;
  s.problem = p;
  s.grid = ChebGrid(sizes, p.domain);
  s.time_points = time_points;
  s.h = p.horizon / static_cast<double>(time_points - 1);
  s.eps = eps;
  s.cross_cfg = cross_cfg;
  s.cross_cfg.eps_ca = eps;
  // The state is rounded to eps right after every cross, so compressing the
  // sampled fibers at eps as well would truncate twice per step.
  if (s.cross_cfg.fiber_eps == 0.0) s.cross_cfg.fiber_eps = 0.1 * eps;
  s.cross_cfg.seed = seed;

  const TTTensor guess = tt_rank1_random(sizes, seed);
  CrossResult init = cross_on_cheb_grid(p.rho0, s.grid, guess, s.cross_cfg);
  if (!init.converged) throw std::runtime_error("build_stepper: cross approximation of the initial density did not converge");
  s.state = tt_round(init.tensor, eps);
  s.conv_guess = s.state;

  for (Index k = 0; k < p.dim; ++k) {
    const Interval& box = p.domain[static_cast<std::size_t>(k)];
    const Index n = sizes[static_cast<std::size_t>(k)];
    // Without boundary rows exp(t D) is violently non-normal (entries ~1e7).
    // The density is negligible on the box faces, so hold those nodes fixed.
    MatrixXd d2 = cheb_diff2(n, box.lo, box.hi);
    d2.row(0).setZero();
    d2.row(n - 1).setZero();
    s.z_mats.push_back(matrix_exponential((s.h / 2.0) * p.diffusion * d2));
  }
  return s;
}

/// state <- round(Z_1 (x) ... (x) Z_d applied to state). No-op when D_c = 0.
inline void diffusion_half_step(Stepper& s) {
  if (s.problem.diffusion == 0.0) return;
  s.state = tt_round(tt_apply_mode_matrices(s.state, s.z_mats), s.eps);
}

/// Convection over [t, t + h] at the points `x_star` (P x d): trace each
/// point back along the drift, read the density there from the interpolant,
/// and carry it forward with d w / dt = -(sum_k d f_k / d x_k) w.
/// Feet that land outside the box start from zero density. Clamping them to
/// the face instead feeds the face value back every step, and a contracting
/// drift amplifies it by exp(-div h) each time.
inline VectorXd convection_values(const MatrixXd& x_star, double t, double h, const ChebCoeffs& coeffs,
                                  const ProblemDef& p) {
  const Index d = p.dim;
  const Index count = x_star.rows();
  if (x_star.cols() != d) throw std::invalid_argument("convection_values: points have the wrong dimension");

  const BatchRhs flow = [&p](const MatrixXd& y, double tt) { return p.drift(y, tt); };
  const MatrixXd feet = rk4_step(flow, t + h, t, x_star);

  MatrixXd inside_feet = feet;
  Eigen::Array<bool, Eigen::Dynamic, 1> outside = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(count, false);
  for (Index k = 0; k < d; ++k) {
    const Interval& box = coeffs.grid.bounds(k);
    const double slack = 1e-12 * (box.hi - box.lo);
    for (Index i = 0; i < count; ++i) {
      const double v = feet(i, k);
      if (v < box.lo - slack || v > box.hi + slack) outside(i) = true;
      inside_feet(i, k) = std::clamp(v, box.lo, box.hi);
    }
  }

  MatrixXd z(count, d + 1);
  z.leftCols(d) = feet;
  z.col(d) = outside.select(0.0, interp_eval(coeffs, inside_feet));

  const BatchRhs augmented = [&p, d, count](const MatrixXd& y, double tt) {
    const MatrixXd x = y.leftCols(d);
    MatrixXd out(count, d + 1);
    out.leftCols(d) = p.drift(x, tt);
    out.col(d) = -(p.drift_div(x, tt).array() * y.col(d).array()).matrix();
    return out;
  };
  return rk4_step(augmented, t, t + h, z).col(d);
}

/// One Strang step from t = m h to (m + 1) h.
inline StepInfo step(Stepper& s, Index m) {
  detail::require(m >= 0 && m <= s.time_points - 2, "step: step index out of range");
  const double t = static_cast<double>(m) * s.h;

  diffusion_half_step(s);
  const ChebCoeffs coeffs = interp_coeffs(s.state, s.grid, s.eps);

  const PointOracle conv = [&](const MatrixXd& x) { return convection_values(x, t, s.h, coeffs, s.problem); };
  CrossConfig cfg = s.cross_cfg;
  cfg.seed = s.cross_cfg.seed + static_cast<std::uint64_t>(m) + 1;
  CrossResult res = cross_on_cheb_grid(conv, s.grid, s.conv_guess, cfg);
  s.state = std::move(res.tensor);
  s.conv_guess = s.state;

  diffusion_half_step(s);
  return StepInfo{res.converged, res.half_sweeps, res.evaluations};
}

/// Diagnostics for the state after one step. Problem-specific columns are
/// left empty unless an observer fills them in.
struct StepRecord {
  Index step = 0;  ///< number of completed steps; the state is at t = step * h
  double t = 0.0;
  double erank = 1.0;
  std::optional<double> err_analytic;
  std::optional<double> err_stationary;
  std::optional<double> psi;
  std::optional<double> eta;
  double mass = 0.0;
  double min_nodal = 0.0;
  double max_nodal = 0.0;
  double wall_seconds = 0.0;
  bool cross_converged = true;
};

using SolveReport = std::vector<StepRecord>;

using Observer = std::function<void(const Stepper&, StepRecord&)>;

struct SolveOptions {
  std::vector<Observer> observers;
  /// Called with every finished record, e.g. to stream it to disk.
  std::function<void(const StepRecord&)> on_record;
};

struct SolveResult {
  TTTensor state;
  SolveReport report;
  bool all_converged = true;
  std::optional<std::string> failure;  ///< set if the run stopped early
};

inline void fill_common_metrics(const Stepper& s, StepRecord& rec) {
  rec.erank = tt_erank(s.state);
  rec.mass = tt_integrate(s.state, s.grid);
  const Extrema e = tt_extrema(s.state);
  rec.min_nodal = e.min;
  rec.max_nodal = e.max;
}

/// Runs steps m = 0 .. M-2 and reports diagnostics after each one. Errors
/// stop the run; the records of all completed steps are still returned.
inline SolveResult solve(const ProblemDef& p, const std::vector<Index>& sizes, Index time_points, double eps,
                         const CrossConfig& cross_cfg, std::uint64_t seed, const SolveOptions& opts = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  SolveResult out;
  Stepper s = build_stepper(p, sizes, time_points, eps, cross_cfg, seed);
  for (Index m = 0; m + 1 < time_points; ++m) {
    StepRecord rec;
    try {
      const StepInfo info = step(s, m);
      rec.step = m + 1;
      rec.t = static_cast<double>(m + 1) * s.h;
      rec.cross_converged = info.cross_converged;
      out.all_converged = out.all_converged && info.cross_converged;
      fill_common_metrics(s, rec);
      for (const auto& obs : opts.observers) obs(s, rec);
    } catch (const std::exception& e) {
      out.failure = "step " + std::to_string(m + 1) + ": " + e.what();
      break;
    }
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    out.report.push_back(rec);
    if (opts.on_record) opts.on_record(rec);
  }
  out.state = s.state;
  return out;
}

}  // namespace fpcross
