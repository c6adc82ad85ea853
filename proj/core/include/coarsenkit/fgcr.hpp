#pragma once

#include "coarsenkit/solver.hpp"

namespace coarsenkit {

struct FgcrResult {
  CoarsenedGraph coarsened;  // carries W (k x d) and H (d x n); features_c = W H
  SolverTrace trace;
  KktReport kkt;
};

/// Problem data for the reduced-feature objective
///   -gamma logdet(C^T Theta C + J) + tr(W^T C^T Theta C W)
///   + alpha/2 ||C W H - X||_F^2 + lambda/2 ||C^T||_{1,2}^2.
struct FgcrProblem {
  const SpMat* theta = nullptr;
  const Eigen::MatrixXd* x = nullptr;
  double gamma = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  int k = 0;
  int d = 0;
};

double objective_fgcr(const FgcrProblem& prob, const Eigen::MatrixXd& c,
                      const Eigen::MatrixXd& w, const Eigen::MatrixXd& h);

/// -2 gamma Theta C (C^T Theta C + J)^{-1} + alpha (C W H - X) H^T W^T
/// + 2 Theta C W W^T + lambda C 1_{k x k}.
Eigen::MatrixXd grad_c_fgcr(const FgcrProblem& prob, const Eigen::MatrixXd& c,
                            const Eigen::MatrixXd& w, const Eigen::MatrixXd& h);

/// 2 C^T Theta C W + alpha C^T (C W H - X) H^T.
Eigen::MatrixXd grad_w_fgcr(const FgcrProblem& prob, const Eigen::MatrixXd& c,
                            const Eigen::MatrixXd& w, const Eigen::MatrixXd& h);

/// alpha W^T C^T (C W H - X).
Eigen::MatrixXd grad_h_fgcr(const FgcrProblem& prob, const Eigen::MatrixXd& c,
                            const Eigen::MatrixXd& w, const Eigen::MatrixXd& h);

/// Cyclic block updates C -> W -> H per outer iteration: the loading matrix
/// takes inner_iters projected-gradient steps, the unconstrained W and H
/// blocks one backtracked gradient step each. Rounds C at the end and
/// rebuilds Theta_c and X_tilde = W H from the rounded map.
FgcrResult fgcr_solve(const GraphData& graph, const SolverConfig& config);

}  // namespace coarsenkit
