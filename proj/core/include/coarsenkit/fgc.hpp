#pragma once

#include "coarsenkit/solver.hpp"

namespace coarsenkit {

struct FgcResult {
  CoarsenedGraph coarsened;
  SolverTrace trace;
  double epsilon = 0.0;
  KktReport kkt;  // at the final relaxed iterate
};

/// Joint coarsening of the Laplacian and the feature matrix: alternates
/// inner_iters projected-gradient updates of the loading matrix with one
/// closed-form solve of the coarsened features per outer iteration, then
/// rounds the loading matrix and recomputes Theta_c and X_tilde from the
/// rounded map. k_override fixes the supernode count exactly (clustering
/// use); by default it comes from config.ratio.
FgcResult fgc_solve(const GraphData& graph, const SolverConfig& config,
                    std::optional<int> k_override = std::nullopt);

/// One explicit gradient step on the feature block,
/// Xt - eta (2 C^T Theta C Xt + alpha C^T (C Xt - X)); the inverse-free
/// alternative to the closed form.
Eigen::MatrixXd fgc_xtilde_gradient_step(const Eigen::MatrixXd& x_tilde,
                                         const Eigen::MatrixXd& c, const FgcProblem& prob,
                                         double eta);

}  // namespace coarsenkit
