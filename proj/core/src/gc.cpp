#include "coarsenkit/gc.hpp"

#include <chrono>
#include <cmath>

#include "coarsenkit/rng.hpp"

namespace coarsenkit {

double objective_gc(const GcProblem& prob, const Eigen::MatrixXd& c) {
  const auto term = detail::make_logdet_term(*prob.theta, c, prob.k);
  if (!term.positive_definite) return std::numeric_limits<double>::infinity();
  return -prob.gamma * term.logdet + detail::row_l12_penalty(c, prob.lambda);
}

Eigen::MatrixXd grad_c_gc(const GcProblem& prob, const Eigen::MatrixXd& c) {
  const auto term = detail::make_logdet_term(*prob.theta, c, prob.k);
  if (!term.positive_definite) {
    throw SolverError("C^T Theta C + J is not positive definite; rank-deficient iterate");
  }
  const Eigen::MatrixXd theta_c_prod = *prob.theta * c;
  Eigen::MatrixXd grad =
      -2.0 * prob.gamma * (term.llt.solve(theta_c_prod.transpose())).transpose();
  const Eigen::VectorXd row_sums = c.rowwise().sum();
  grad.colwise() += prob.lambda * row_sums;
  return grad;
}

GcResult gc_solve(const GraphData& graph, const SolverConfig& config) {
  config.validate();
  if (!is_connected(graph.laplacian)) {
    throw ValidationError("input graph is disconnected");
  }
  const int p = graph.p;
  const int k = config.supernode_count(p);

  const auto t_start = std::chrono::steady_clock::now();
  GcProblem prob{&graph.laplacian, config.gamma, config.lambda, k};
  Rng rng(config.seed);

  Eigen::MatrixXd c(p, k);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < k; ++j) c(i, j) = rng.uniform();
  }
  c = project_nonneg_rowscaled(c);
  const Eigen::MatrixXd c_init = c;

  double f_cur = objective_gc(prob, c);
  if (!std::isfinite(f_cur)) {
    throw SolverError("initial iterate is infeasible (log-det term undefined)");
  }

  GcResult result;
  result.trace.objective.push_back(f_cur);
  std::vector<int> row_restarts(static_cast<std::size_t>(p), 0);
  double l_cur = 1.0;

  const auto residual_at = [&](const Eigen::MatrixXd& point, double l) {
    const Eigen::MatrixXd grad = grad_c_gc(prob, point);
    std::vector<Eigen::Index> zeros;
    const Eigen::MatrixXd next = project_nonneg_rowscaled(point - grad / l, &zeros);
    return l * (point - next).norm();
  };

  // The row-rescaled update can transiently raise the objective before the
  // sequence settles on a fixed point. The sequence runs untouched (its limit
  // carries the stationarity diagnostics); an incumbent records the best
  // iterate at outer boundaries and provides the non-increasing trace plus
  // the iterate that is rounded at the end.
  const bool track_objective = config.step_rule != StepRule::FixedInverseK;
  Eigen::MatrixXd c_incumbent = c;
  double f_incumbent = f_cur;

  for (int outer = 0; outer < config.outer_iters; ++outer) {
    for (int inner = 0; inner < config.inner_iters; ++inner) {
      const Eigen::MatrixXd grad = grad_c_gc(prob, c);
      if (config.step_rule == StepRule::FixedInverseK) {
        l_cur = static_cast<double>(k);
        std::vector<Eigen::Index> zeros;
        c = project_nonneg_rowscaled(c - grad / l_cur, &zeros);
      } else {
        const auto candidate = [&](double l) {
          std::vector<Eigen::Index> zeros;
          return project_nonneg_rowscaled(c - grad / l, &zeros);
        };
        const auto objective = [&](const Eigen::MatrixXd& trial) {
          return objective_gc(prob, trial);
        };
        Eigen::MatrixXd accepted;
        double f_accepted = f_cur;
        // Floor the step so at least one entry per row survives the clamp.
        double l_floor = 0.0;
        for (Eigen::Index i = 0; i < c.rows(); ++i) {
          double row_need = std::numeric_limits<double>::infinity();
          for (Eigen::Index j = 0; j < c.cols(); ++j) {
            if (c(i, j) > 1e-12) row_need = std::min(row_need, grad(i, j) / c(i, j));
          }
          if (std::isfinite(row_need) && row_need > 0.0) {
            l_floor = std::max(l_floor, row_need);
          }
        }
        const double l_hint = std::max({l_cur, 1.05 * l_floor, 1e-6});
        l_cur = detail::backtrack_step(l_hint, f_cur, grad, candidate, objective, c,
                                       &accepted, &f_accepted);
        c = std::move(accepted);
        f_cur = f_accepted;
      }
      // restart a dead row once; afterwards leave it for rounding to judge
      bool revived = false;
      for (Eigen::Index i = 0; i < c.rows(); ++i) {
        if (c.row(i).isZero(0.0) && row_restarts[static_cast<std::size_t>(i)] == 0) {
          ++row_restarts[static_cast<std::size_t>(i)];
          Eigen::VectorXd fresh(k);
          for (int j = 0; j < k; ++j) fresh(j) = rng.uniform();
          c.row(i) = fresh.transpose() / fresh.norm();
          revived = true;
        }
      }
      if (revived && track_objective) f_cur = objective_gc(prob, c);
    }

    if (!track_objective) f_cur = objective_gc(prob, c);
    const double f_incumbent_prev = f_incumbent;
    if (f_cur < f_incumbent) {
      f_incumbent = f_cur;
      c_incumbent = c;
    }
    result.trace.objective.push_back(f_incumbent);
    result.trace.grad_norm.push_back(residual_at(c, l_cur));

    const auto& residuals = result.trace.grad_norm;
    const bool incumbent_stalled =
        f_incumbent_prev - f_incumbent <=
        config.tol * std::max(1.0, std::abs(f_incumbent));
    if (incumbent_stalled && residuals.back() <= 1e-9 * residuals.front()) {
      break;  // sequence converged to a fixed point
    }
    // A residual that has not decayed over a long window marks a persistent
    // wander; damping the steps collapses it onto a fixed point. Steady slow
    // decay is left alone and simply runs the budget out.
    if (residuals.size() > 20 &&
        residuals.back() > 0.95 * residuals[residuals.size() - 21]) {
      l_cur *= 2.0;
    }
  }

  const double l_ref = l_cur;
  result.trace.initial_residual = residual_at(c_init, l_ref);
  result.trace.final_residual = residual_at(c, l_ref);
  result.kkt.c_residual = result.trace.final_residual;
  result.kkt.x_residual = 0.0;
  result.kkt.stationary =
      result.trace.final_residual < 1e-3 * result.trace.initial_residual;

  RoundResult rounded = round_loading(c_incumbent);
  result.coarsened.loading = std::move(rounded.loading);
  result.coarsened.k = result.coarsened.loading.k();
  result.coarsened.laplacian_c = coarsen_laplacian(graph.laplacian, result.coarsened.loading);

  result.trace.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

Eigen::MatrixXd smooth_features(const Eigen::MatrixXd& theta_c, const Eigen::MatrixXd& x_tilde) {
  if (theta_c.rows() != x_tilde.rows()) {
    throw DimensionError("smooth_features: Theta_c is " + std::to_string(theta_c.rows()) +
                         "-dim but X_tilde has " + std::to_string(x_tilde.rows()) + " rows");
  }
  Eigen::MatrixXd system = theta_c;
  system.diagonal().array() += 1.0;
  return Eigen::LLT<Eigen::MatrixXd>(system).solve(x_tilde);
}

GcResult two_stage_solve(const GraphData& graph, const SolverConfig& config) {
  if (!graph.has_features()) {
    throw ArgumentError("two-stage coarsening needs a feature matrix");
  }
  GcResult result = gc_solve(graph, config);
  const Eigen::MatrixXd x_tilde = coarsen_features(*graph.features, result.coarsened.loading);
  result.coarsened.features_c = smooth_features(result.coarsened.laplacian_c, x_tilde);
  return result;
}

}  // namespace coarsenkit
