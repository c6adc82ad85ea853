#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "coarsenkit/graph.hpp"

namespace coarsenkit {

enum class StepRule { AnalyticBound, Backtracking, FixedInverseK };

struct SolverConfig {
  double gamma = 500.0;    // log-det weight
  double alpha = 500.0;    // feature-fidelity weight
  double lambda = 500.0;   // l_{1,2}^2 weight
  double ratio = 0.5;      // k / p
  std::optional<double> reduction_ratio;  // d / n, reduced-feature solver only
  int outer_iters = 10;
  int inner_iters = 100;   // loading-matrix updates per outer iteration
  StepRule step_rule = StepRule::Backtracking;
  double tol = 1e-6;       // relative objective-change stop
  std::uint64_t seed = 0;

  void validate(bool need_reduction_ratio = false) const;
  int supernode_count(int p) const;  // max(2, round(ratio * p)), capped at p-1
  int reduced_dim(int n) const;      // max(1, round(reduction_ratio * n))
};

struct SolverTrace {
  std::vector<double> objective;      // per outer iteration, element 0 = initial
  std::vector<double> grad_norm;      // loading-matrix residual per outer iteration
  std::vector<double> epsilon_track;  // per outer iteration; empty for featureless runs
  double wall_time = 0.0;

  // Residuals in a common scale: both measured with the final step length.
  double initial_residual = std::numeric_limits<double>::quiet_NaN();
  double final_residual = std::numeric_limits<double>::quiet_NaN();

  // Dirichlet energy of the coarsened pair before and after rounding.
  double de_relaxed = std::numeric_limits<double>::quiet_NaN();
  double de_rounded = std::numeric_limits<double>::quiet_NaN();
};

struct KktReport {
  double c_residual = 0.0;
  double x_residual = 0.0;
  bool stationary = false;
};

/// Problem data for the featured coarsening objective
///   -gamma logdet(C^T Theta C + J) + tr(Xt^T C^T Theta C Xt)
///   + alpha/2 ||C Xt - X||_F^2 + lambda/2 ||C^T||_{1,2}^2,  J = (1/k) 1.
struct FgcProblem {
  const SpMat* theta = nullptr;
  const Eigen::MatrixXd* x = nullptr;
  double gamma = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  int k = 0;
};

/// Products that stay constant while Xt is fixed; rebuilt once per outer
/// iteration so the inner loop avoids the p x n multiplications.
struct FgcCache {
  Eigen::MatrixXd xt_xt_t;  // Xt Xt^T (k x k)
  Eigen::MatrixXd x_xt_t;   // X Xt^T  (p x k)
};
FgcCache make_fgc_cache(const FgcProblem& prob, const Eigen::MatrixXd& x_tilde);

/// Entrywise max(a_ij / ||row_i(a)||_2, 0). Rows whose output is entirely
/// zero (all-nonpositive or zero input rows) are appended to zero_rows when
/// given; with zero_rows == nullptr a zero input row throws SolverError.
Eigen::MatrixXd project_nonneg_rowscaled(const Eigen::MatrixXd& a,
                                         std::vector<Eigen::Index>* zero_rows = nullptr);

/// Objective value; +infinity when C^T Theta C + J is not positive definite.
double objective_fgc(const FgcProblem& prob, const Eigen::MatrixXd& c,
                     const Eigen::MatrixXd& x_tilde);

/// -2 gamma Theta C (C^T Theta C + J)^{-1} + alpha (C Xt - X) Xt^T
/// + 2 Theta C Xt Xt^T + lambda C 1_{k x k}.
/// Throws SolverError when the inner matrix is not positive definite.
Eigen::MatrixXd grad_c_fgc(const FgcProblem& prob, const Eigen::MatrixXd& c,
                           const Eigen::MatrixXd& x_tilde, const FgcCache* cache = nullptr);

/// Step-length policy. Backtracking doubles l_hint until the quadratic
/// majorizer dominates the objective at the candidate step (at most 60
/// doublings). AnalyticBound assembles per-term Lipschitz estimates, then
/// verifies the same inequality. FixedInverseK returns k.
double fgc_step_length(const FgcProblem& prob, const Eigen::MatrixXd& c,
                       const Eigen::MatrixXd& x_tilde, const Eigen::MatrixXd& grad,
                       double objective_at_c, StepRule rule, double l_hint,
                       const FgcCache* cache = nullptr);

/// Closed-form minimizer of the Xt block:
/// ((2/alpha) C^T Theta C + C^T C)^{-1} C^T X.
Eigen::MatrixXd fgc_xtilde_closed_form(const FgcProblem& prob, const Eigen::MatrixXd& c);

/// Stationarity diagnostics. c_residual is the fixed-point residual of the
/// projected update at step 1/l_ref, scaled back to gradient units:
/// l_ref * ||C - (C - (1/l_ref) grad)^+||_F. x_residual is the raw gradient
/// norm ||2 C^T Theta C Xt + alpha C^T (C Xt - X)||_F.
KktReport check_kkt_fgc(const FgcProblem& prob, const Eigen::MatrixXd& c,
                        const Eigen::MatrixXd& x_tilde, double tol, double l_ref);

namespace detail {

/// logdet(C^T Theta C + J) bundle shared by all solvers.
struct LogDetTerm {
  Eigen::MatrixXd theta_c;   // C^T Theta C (without J)
  Eigen::LLT<Eigen::MatrixXd> llt;  // of theta_c + J
  double logdet = 0.0;
  bool positive_definite = false;
};
LogDetTerm make_logdet_term(const SpMat& theta, const Eigen::MatrixXd& c, int k);

/// lambda/2 * sum_i (row sum of C)_i^2.
double row_l12_penalty(const Eigen::MatrixXd& c, double lambda);

/// Generic backtracking on an L-smooth block: doubles l until
/// f(candidate(l)) <= f0 + <grad, delta> + l/2 ||delta||^2.
/// candidate(l) produces the trial point; objective evaluates it.
/// Returns the accepted l; the last trial point/value are written through.
/// With require_descent the trial must also not raise the objective; when no
/// such step exists within 60 doublings the current point is kept (the
/// iterate is stationary for this update map) instead of throwing.
template <class Candidate, class Objective>
double backtrack_step(double l_hint, double f0, const Eigen::MatrixXd& grad,
                      const Candidate& candidate, const Objective& objective,
                      const Eigen::MatrixXd& current, Eigen::MatrixXd* accepted,
                      double* f_accepted, bool require_descent = false) {
  double l = std::max(l_hint, 1e-12);
  const double slack = 1e-10 * std::max(1.0, std::abs(f0));
  for (int attempt = 0; attempt < 60; ++attempt) {
    Eigen::MatrixXd trial = candidate(l);
    const double f_trial = objective(trial);
    const Eigen::MatrixXd delta = trial - current;
    const double bound = f0 + (grad.cwiseProduct(delta)).sum() + 0.5 * l * delta.squaredNorm();
    const bool majorized = std::isfinite(f_trial) && f_trial <= bound + slack;
    if (majorized && (!require_descent || f_trial <= f0 + slack)) {
      if (accepted) *accepted = std::move(trial);
      if (f_accepted) *f_accepted = f_trial;
      return l;
    }
    l *= 2.0;
  }
  if (require_descent) {
    if (accepted) *accepted = current;
    if (f_accepted) *f_accepted = f0;
    return l;
  }
  throw SolverError("backtracking exceeded 60 doublings; objective is not smooth here");
}

}  // namespace detail

}  // namespace coarsenkit
