#pragma once

#include "coarsenkit/solver.hpp"

namespace coarsenkit {

struct GcResult {
  CoarsenedGraph coarsened;
  SolverTrace trace;
  KktReport kkt;
};

/// Problem data for the featureless objective
///   -gamma logdet(C^T Theta C + J) + lambda/2 ||C^T||_{1,2}^2.
struct GcProblem {
  const SpMat* theta = nullptr;
  double gamma = 0.0;
  double lambda = 0.0;
  int k = 0;
};

double objective_gc(const GcProblem& prob, const Eigen::MatrixXd& c);

/// -2 gamma Theta C (C^T Theta C + J)^{-1} + lambda C 1_{k x k}.
Eigen::MatrixXd grad_c_gc(const GcProblem& prob, const Eigen::MatrixXd& c);

/// Coarsens from the Laplacian alone; any feature matrix on the input is
/// ignored. The returned coarsened graph carries no features.
GcResult gc_solve(const GraphData& graph, const SolverConfig& config);

/// Smooth coarse features (Theta_c + I)^{-1} X_tilde, the closed-form
/// minimizer of ||Xc - X_tilde||_F^2 + tr(Xc^T Theta_c Xc).
Eigen::MatrixXd smooth_features(const Eigen::MatrixXd& theta_c, const Eigen::MatrixXd& x_tilde);

/// Featureless solve followed by the smooth-feature stage: X_tilde = P X,
/// then Xc = (Theta_c + I)^{-1} X_tilde.
GcResult two_stage_solve(const GraphData& graph, const SolverConfig& config);

}  // namespace coarsenkit
