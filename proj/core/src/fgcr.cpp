#include "coarsenkit/fgcr.hpp"

#include <Eigen/SVD>
#include <chrono>
#include <cmath>

#include "coarsenkit/metrics.hpp"
#include "coarsenkit/rng.hpp"

namespace coarsenkit {

namespace {

/// Per-cycle products for the C block while W, H are fixed.
struct CBlockCache {
  Eigen::MatrixXd k1;  // W H H^T W^T (k x k)
  Eigen::MatrixXd kw;  // W W^T (k x k)
  Eigen::MatrixXd k2;  // X H^T W^T (p x k)
};

CBlockCache make_c_cache(const FgcrProblem& prob, const Eigen::MatrixXd& w,
                         const Eigen::MatrixXd& h) {
  CBlockCache cache;
  const Eigen::MatrixXd whh = w * (h * h.transpose());
  cache.k1 = whh * w.transpose();
  cache.kw = w * w.transpose();
  cache.k2 = (*prob.x * h.transpose()) * w.transpose();
  return cache;
}

double objective_fgcr_cached(const FgcrProblem& prob, const Eigen::MatrixXd& c,
                             const CBlockCache& cache, double x_sq) {
  const auto term = detail::make_logdet_term(*prob.theta, c, prob.k);
  if (!term.positive_definite) return std::numeric_limits<double>::infinity();
  const double smooth = (term.theta_c.cwiseProduct(cache.kw)).sum();
  const Eigen::MatrixXd ctc = c.transpose() * c;
  const double fidelity_quad = (ctc.cwiseProduct(cache.k1)).sum();
  const double fidelity_cross = (c.cwiseProduct(cache.k2)).sum();
  const double fidelity = 0.5 * prob.alpha * (fidelity_quad - 2.0 * fidelity_cross + x_sq);
  return -prob.gamma * term.logdet + smooth + fidelity + detail::row_l12_penalty(c, prob.lambda);
}

Eigen::MatrixXd grad_c_fgcr_cached(const FgcrProblem& prob, const Eigen::MatrixXd& c,
                                   const CBlockCache& cache) {
  const auto term = detail::make_logdet_term(*prob.theta, c, prob.k);
  if (!term.positive_definite) {
    throw SolverError("C^T Theta C + J is not positive definite; rank-deficient iterate");
  }
  const Eigen::MatrixXd theta_c_prod = *prob.theta * c;
  Eigen::MatrixXd grad =
      -2.0 * prob.gamma * (term.llt.solve(theta_c_prod.transpose())).transpose();
  grad.noalias() += prob.alpha * (c * cache.k1 - cache.k2);
  grad.noalias() += 2.0 * (*prob.theta * (c * cache.kw));
  const Eigen::VectorXd row_sums = c.rowwise().sum();
  grad.colwise() += prob.lambda * row_sums;
  return grad;
}

}  // namespace

double objective_fgcr(const FgcrProblem& prob, const Eigen::MatrixXd& c,
                      const Eigen::MatrixXd& w, const Eigen::MatrixXd& h) {
  return objective_fgcr_cached(prob, c, make_c_cache(prob, w, h), prob.x->squaredNorm());
}

Eigen::MatrixXd grad_c_fgcr(const FgcrProblem& prob, const Eigen::MatrixXd& c,
                            const Eigen::MatrixXd& w, const Eigen::MatrixXd& h) {
  return grad_c_fgcr_cached(prob, c, make_c_cache(prob, w, h));
}

Eigen::MatrixXd grad_w_fgcr(const FgcrProblem& prob, const Eigen::MatrixXd& c,
                            const Eigen::MatrixXd& w, const Eigen::MatrixXd& h) {
  const Eigen::MatrixXd theta_c = c.transpose() * (*prob.theta * c);
  Eigen::MatrixXd grad = 2.0 * theta_c * w;
  grad.noalias() += prob.alpha * (c.transpose() * (c * (w * h) - *prob.x)) * h.transpose();
  return grad;
}

Eigen::MatrixXd grad_h_fgcr(const FgcrProblem& prob, const Eigen::MatrixXd& c,
                            const Eigen::MatrixXd& w, const Eigen::MatrixXd& h) {
  return prob.alpha * (w.transpose() * (c.transpose() * (c * (w * h) - *prob.x)));
}

FgcrResult fgcr_solve(const GraphData& graph, const SolverConfig& config) {
  config.validate(/*need_reduction_ratio=*/true);
  if (!graph.has_features()) {
    throw ArgumentError("reduced-feature coarsening needs a feature matrix");
  }
  if (!is_connected(graph.laplacian)) {
    throw ValidationError("input graph is disconnected");
  }
  const int p = graph.p;
  const int n = graph.feature_dim();
  const int k = config.supernode_count(p);
  const int d = config.reduced_dim(n);

  const auto t_start = std::chrono::steady_clock::now();
  FgcrProblem prob{&graph.laplacian, &*graph.features, config.gamma, config.alpha,
                   config.lambda, k, d};
  Rng rng(config.seed);

  Eigen::MatrixXd c(p, k);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < k; ++j) c(i, j) = rng.uniform();
  }
  c = project_nonneg_rowscaled(c);
  const Eigen::MatrixXd c_init = c;

  // W, H start from the top-d directions of the initial coarse features
  // pinv(C) X, so the factorization begins on the low-rank manifold.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, d);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, n);
  {
    const Eigen::MatrixXd ctc = c.transpose() * c;
    const Eigen::MatrixXd x0 =
        Eigen::LLT<Eigen::MatrixXd>(ctc).solve(c.transpose() * (*prob.x));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const int rank0 = std::min<int>(d, static_cast<int>(svd.singularValues().size()));
    w.leftCols(rank0) =
        svd.matrixU().leftCols(rank0) * svd.singularValues().head(rank0).asDiagonal();
    h.topRows(rank0) = svd.matrixV().leftCols(rank0).transpose();
  }

  const double x_sq = prob.x->squaredNorm();
  const double de_original = dirichlet_energy(graph.laplacian, *graph.features);
  const double norm_original = std::sqrt(std::max(de_original, 0.0));

  FgcrResult result;
  CBlockCache cache = make_c_cache(prob, w, h);
  double f_cur = objective_fgcr_cached(prob, c, cache, x_sq);
  if (!std::isfinite(f_cur)) {
    throw SolverError("initial iterate is infeasible (log-det term undefined)");
  }
  result.trace.objective.push_back(f_cur);

  std::vector<int> row_restarts(static_cast<std::size_t>(p), 0);
  double l_c = 1.0, l_w = 1.0, l_h = 1.0;

  const bool track_objective = config.step_rule != StepRule::FixedInverseK;
  const int wh_step_cap = std::max(4, config.inner_iters / 2);

  // As in the featured solver: the sequence runs the row-rescaled updates
  // untouched, an incumbent keeps the best (C, W, H) triple for the trace and
  // the final rounding.
  Eigen::MatrixXd c_incumbent = c, w_incumbent = w, h_incumbent = h;
  double f_incumbent = f_cur;

  for (int outer = 0; outer < config.outer_iters; ++outer) {
    // --- C block -------------------------------------------------------------
    for (int inner = 0; inner < config.inner_iters; ++inner) {
      const Eigen::MatrixXd grad = grad_c_fgcr_cached(prob, c, cache);
      if (config.step_rule == StepRule::FixedInverseK) {
        l_c = static_cast<double>(k);
        std::vector<Eigen::Index> zeros;
        c = project_nonneg_rowscaled(c - grad / l_c, &zeros);
      } else {
        const auto candidate = [&](double l) {
          std::vector<Eigen::Index> zeros;
          return project_nonneg_rowscaled(c - grad / l, &zeros);
        };
        const auto objective = [&](const Eigen::MatrixXd& trial) {
          return objective_fgcr_cached(prob, trial, cache, x_sq);
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
        const double l_hint = std::max({l_c, 1.05 * l_floor, 1e-6});
        l_c = detail::backtrack_step(l_hint, f_cur, grad, candidate, objective, c,
                                     &accepted, &f_accepted);
        c = std::move(accepted);
        f_cur = f_accepted;
      }
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
      if (revived && track_objective) f_cur = objective_fgcr_cached(prob, c, cache, x_sq);
    }

    // --- W block: unconstrained majorized steps (guaranteed descent) --------
    const Eigen::MatrixXd theta_c_relaxed = c.transpose() * (*prob.theta * c);
    const Eigen::MatrixXd ctc = c.transpose() * c;
    const Eigen::MatrixXd ctx = c.transpose() * (*prob.x);
    {
      const Eigen::MatrixXd hht = h * h.transpose();
      const Eigen::MatrixXd bht = ctx * h.transpose();
      const auto f_w = [&](const Eigen::MatrixXd& wt) {
        const double smooth = (wt.cwiseProduct(theta_c_relaxed * wt)).sum();
        const Eigen::MatrixXd gw = ctc * wt;
        const double quad = ((wt.transpose() * gw).cwiseProduct(hht)).sum();
        const double cross = (wt.cwiseProduct(bht)).sum();
        return smooth + 0.5 * prob.alpha * (quad - 2.0 * cross + x_sq);
      };
      double f_block = f_w(w);
      for (int step = 0; step < wh_step_cap; ++step) {
        Eigen::MatrixXd grad = 2.0 * theta_c_relaxed * w;
        grad.noalias() += prob.alpha * ((ctc * w) * hht - bht);
        const auto candidate = [&](double l) { return Eigen::MatrixXd(w - grad / l); };
        Eigen::MatrixXd accepted;
        double f_next = f_block;
        l_w = detail::backtrack_step(std::max(l_w * 0.5, 1e-6), f_block, grad, candidate, f_w,
                                     w, &accepted, &f_next);
        w = std::move(accepted);
        const bool quiet = f_block - f_next <= 1e-12 * std::max(1.0, std::abs(f_block));
        f_block = f_next;
        if (quiet) break;
      }
    }

    // --- H block -------------------------------------------------------------
    {
      const Eigen::MatrixXd wgw = w.transpose() * (ctc * w);  // W^T C^T C W (d x d)
      const Eigen::MatrixXd wb = w.transpose() * ctx;         // W^T C^T X (d x n)
      const auto f_h = [&](const Eigen::MatrixXd& ht) {
        const double quad = (ht.cwiseProduct(wgw * ht)).sum();
        const double cross = (ht.cwiseProduct(wb)).sum();
        return 0.5 * prob.alpha * (quad - 2.0 * cross + x_sq);
      };
      double f_block = f_h(h);
      for (int step = 0; step < wh_step_cap; ++step) {
        const Eigen::MatrixXd grad = prob.alpha * (wgw * h - wb);
        const auto candidate = [&](double l) { return Eigen::MatrixXd(h - grad / l); };
        Eigen::MatrixXd accepted;
        double f_next = f_block;
        l_h = detail::backtrack_step(std::max(l_h * 0.5, 1e-6), f_block, grad, candidate, f_h,
                                     h, &accepted, &f_next);
        h = std::move(accepted);
        const bool quiet = f_block - f_next <= 1e-12 * std::max(1.0, std::abs(f_block));
        f_block = f_next;
        if (quiet) break;
      }
    }

    cache = make_c_cache(prob, w, h);
    f_cur = objective_fgcr_cached(prob, c, cache, x_sq);
    const double f_incumbent_prev = f_incumbent;
    if (f_cur < f_incumbent) {
      f_incumbent = f_cur;
      c_incumbent = c;
      w_incumbent = w;
      h_incumbent = h;
    }
    result.trace.objective.push_back(f_incumbent);
    {
      std::vector<Eigen::Index> zeros;
      const Eigen::MatrixXd grad = grad_c_fgcr_cached(prob, c, cache);
      const Eigen::MatrixXd next = project_nonneg_rowscaled(c - grad / std::max(l_c, 1e-12), &zeros);
      result.trace.grad_norm.push_back(std::max(l_c, 1e-12) * (c - next).norm());
    }
    if (norm_original > 0.0) {
      const double de_coarse =
          ((w.transpose() * (theta_c_relaxed * w)).cwiseProduct(h * h.transpose())).sum();
      result.trace.epsilon_track.push_back(
          std::abs(norm_original - std::sqrt(std::max(de_coarse, 0.0))) / norm_original);
    }

    const auto& residuals = result.trace.grad_norm;
    const bool incumbent_stalled =
        f_incumbent_prev - f_incumbent <=
        config.tol * std::max(1.0, std::abs(f_incumbent));
    if (incumbent_stalled && residuals.back() <= 1e-9 * residuals.front()) {
      break;  // sequence converged to a joint fixed point
    }
  }

  const double l_ref = std::max(l_c, 1e-12);
  const auto residual_at = [&](const Eigen::MatrixXd& point) {
    std::vector<Eigen::Index> zeros;
    const Eigen::MatrixXd grad = grad_c_fgcr_cached(prob, point, cache);
    const Eigen::MatrixXd next = project_nonneg_rowscaled(point - grad / l_ref, &zeros);
    return l_ref * (point - next).norm();
  };
  result.trace.initial_residual = residual_at(c_init);
  result.trace.final_residual = residual_at(c);
  result.kkt.c_residual = result.trace.final_residual;
  result.kkt.x_residual = std::sqrt(grad_w_fgcr(prob, c, w, h).squaredNorm() +
                                    grad_h_fgcr(prob, c, w, h).squaredNorm());
  result.kkt.stationary =
      result.trace.final_residual < 1e-3 * result.trace.initial_residual;

  w = w_incumbent;
  h = h_incumbent;
  RoundResult rounded = round_loading(c_incumbent);
  CoarsenedGraph& cg = result.coarsened;
  cg.loading = std::move(rounded.loading);
  cg.k = cg.loading.k();
  cg.laplacian_c = coarsen_laplacian(graph.laplacian, cg.loading);
  if (rounded.dropped_columns > 0) {
    Eigen::MatrixXd w_kept(cg.k, d);
    for (int j = 0; j < cg.k; ++j) {
      w_kept.row(j) = w.row(rounded.kept_columns[static_cast<std::size_t>(j)]);
    }
    w = std::move(w_kept);
  }
  cg.reduced_features = w;
  cg.transform = h;
  cg.features_c = w * h;
  result.trace.de_rounded = dirichlet_energy(cg.laplacian_c, *cg.features_c);
  result.trace.de_relaxed = result.trace.de_rounded;

  result.trace.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace coarsenkit
