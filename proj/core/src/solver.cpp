#include "coarsenkit/solver.hpp"

#include <cmath>

namespace coarsenkit {

void SolverConfig::validate(bool need_reduction_ratio) const {
  if (!(gamma > 0.0)) throw ArgumentError("gamma must be strictly positive");
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be strictly positive");
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be strictly positive");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ArgumentError("ratio must lie in (0, 1)");
  if (!(tol > 0.0)) throw ArgumentError("tol must be strictly positive");
  if (outer_iters < 1 || inner_iters < 1) {
    throw ArgumentError("iteration counts must be at least 1");
  }
  if (need_reduction_ratio) {
    if (!reduction_ratio) throw ArgumentError("reduction_ratio is required for this solver");
    if (!(*reduction_ratio > 0.0 && *reduction_ratio < 1.0)) {
      throw ArgumentError("reduction_ratio must lie in (0, 1)");
    }
  } else if (reduction_ratio && !(*reduction_ratio > 0.0 && *reduction_ratio < 1.0)) {
    throw ArgumentError("reduction_ratio must lie in (0, 1)");
  }
}

int SolverConfig::supernode_count(int p) const {
  if (p < 3) throw ArgumentError("graph too small to coarsen (p = " + std::to_string(p) + ")");
  const int k = std::max(2, static_cast<int>(std::lround(ratio * p)));
  return std::min(k, p - 1);
}

int SolverConfig::reduced_dim(int n) const {
  if (!reduction_ratio) throw ArgumentError("reduction_ratio not set");
  return std::max(1, static_cast<int>(std::lround(*reduction_ratio * n)));
}

namespace detail {

LogDetTerm make_logdet_term(const SpMat& theta, const Eigen::MatrixXd& c, int k) {
  LogDetTerm term;
  const Eigen::MatrixXd theta_c_dense = c.transpose() * (theta * c);
  term.theta_c = 0.5 * (theta_c_dense + theta_c_dense.transpose());  // symmetrize roundoff
  Eigen::MatrixXd shifted = term.theta_c;
  shifted.array() += 1.0 / static_cast<double>(k);
  term.llt.compute(shifted);
  if (term.llt.info() == Eigen::Success) {
    const auto& l = term.llt.matrixLLT();
    // Pivots at roundoff scale mean a numerically singular matrix (an empty
    // or collapsed supernode), which the objective must treat as infeasible.
    const double pivot_floor =
        std::sqrt(1e-12 * std::max(shifted.diagonal().maxCoeff(), 1e-300));
    double logdet = 0.0;
    bool ok = true;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      const double pivot = l(i, i);
      if (!(pivot > pivot_floor) || !std::isfinite(pivot)) {
        ok = false;
        break;
      }
      logdet += std::log(pivot);
    }
    term.positive_definite = ok;
    term.logdet = 2.0 * logdet;
  }
  return term;
}

double row_l12_penalty(const Eigen::MatrixXd& c, double lambda) {
  return 0.5 * lambda * c.rowwise().sum().squaredNorm();
}

}  // namespace detail

FgcCache make_fgc_cache(const FgcProblem& prob, const Eigen::MatrixXd& x_tilde) {
  FgcCache cache;
  cache.xt_xt_t = x_tilde * x_tilde.transpose();
  cache.x_xt_t = (*prob.x) * x_tilde.transpose();
  return cache;
}

Eigen::MatrixXd project_nonneg_rowscaled(const Eigen::MatrixXd& a,
                                         std::vector<Eigen::Index>* zero_rows) {
  Eigen::MatrixXd out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double norm = a.row(i).norm();
    if (norm == 0.0) {
      if (!zero_rows) {
        throw SolverError("row " + std::to_string(i) + " is the zero vector; cannot rescale");
      }
      zero_rows->push_back(i);
      out.row(i).setZero();
      continue;
    }
    out.row(i) = (a.row(i) / norm).cwiseMax(0.0);
    if (zero_rows && out.row(i).isZero(0.0)) zero_rows->push_back(i);
  }
  return out;
}

double objective_fgc(const FgcProblem& prob, const Eigen::MatrixXd& c,
                     const Eigen::MatrixXd& x_tilde) {
  const auto term = detail::make_logdet_term(*prob.theta, c, prob.k);
  if (!term.positive_definite) return std::numeric_limits<double>::infinity();
  const double smooth = (x_tilde.cwiseProduct(term.theta_c * x_tilde)).sum();
  const double fidelity = 0.5 * prob.alpha * (c * x_tilde - *prob.x).squaredNorm();
  return -prob.gamma * term.logdet + smooth + fidelity + detail::row_l12_penalty(c, prob.lambda);
}

Eigen::MatrixXd grad_c_fgc(const FgcProblem& prob, const Eigen::MatrixXd& c,
                           const Eigen::MatrixXd& x_tilde, const FgcCache* cache) {
  const auto term = detail::make_logdet_term(*prob.theta, c, prob.k);
  if (!term.positive_definite) {
    throw SolverError("C^T Theta C + J is not positive definite; rank-deficient iterate");
  }
  const Eigen::MatrixXd theta_c_prod = *prob.theta * c;  // Theta C, reused twice
  Eigen::MatrixXd grad = -2.0 * prob.gamma *
                         (term.llt.solve(theta_c_prod.transpose())).transpose();
  if (cache) {
    const Eigen::MatrixXd c_xtxt = c * cache->xt_xt_t;
    grad.noalias() += prob.alpha * (c_xtxt - cache->x_xt_t);
    grad.noalias() += 2.0 * (*prob.theta * c_xtxt);
  } else {
    const Eigen::MatrixXd residual = c * x_tilde - *prob.x;
    grad.noalias() += prob.alpha * residual * x_tilde.transpose();
    grad.noalias() += 2.0 * (theta_c_prod * (x_tilde * x_tilde.transpose()));
  }
  const Eigen::VectorXd row_sums = c.rowwise().sum();
  grad.colwise() += prob.lambda * row_sums;
  return grad;
}

namespace {

double fgc_analytic_bound(const FgcProblem& prob, const Eigen::MatrixXd& x_tilde,
                          const Eigen::MatrixXd& theta_c) {
  const double p = static_cast<double>(prob.theta->rows());
  const double k = static_cast<double>(prob.k);
  const double theta_norm = prob.theta->norm();
  const double xt_sq = x_tilde.squaredNorm();

  // Smallest nonzero coarsened weight, floored; feeds the spectral floor
  // delta / (k-1)^2 that bounds the log-det curvature.
  double delta = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < theta_c.rows(); ++i) {
    for (Eigen::Index j = 0; j < theta_c.cols(); ++j) {
      if (i == j) continue;
      const double w = -theta_c(i, j);
      if (w > 1e-8) delta = std::min(delta, w);
    }
  }
  if (!std::isfinite(delta)) delta = 1e-8;
  const double lambda_floor = std::min(1.0, delta / ((k - 1.0) * (k - 1.0)));

  const double l1 = 2.0 * prob.gamma * theta_norm *
                    (1.0 / lambda_floor + 2.0 * p * theta_norm / (lambda_floor * lambda_floor));
  const double l2 = 2.0 * std::sqrt(p) * std::sqrt(k) * xt_sq * theta_norm;
  const double l3 = prob.alpha * xt_sq;
  const double l4 = prob.lambda * k;
  return std::max(std::max(l1, l2), std::max(l3, l4));
}

}  // namespace

double fgc_step_length(const FgcProblem& prob, const Eigen::MatrixXd& c,
                       const Eigen::MatrixXd& x_tilde, const Eigen::MatrixXd& grad,
                       double objective_at_c, StepRule rule, double l_hint,
                       const FgcCache* cache) {
  (void)cache;
  if (rule == StepRule::FixedInverseK) return static_cast<double>(prob.k);

  const auto candidate = [&](double l) {
    std::vector<Eigen::Index> zero_rows;
    return project_nonneg_rowscaled(c - grad / l, &zero_rows);
  };
  const auto objective = [&](const Eigen::MatrixXd& trial) {
    return objective_fgc(prob, trial, x_tilde);
  };

  if (rule == StepRule::AnalyticBound) {
    const auto term = detail::make_logdet_term(*prob.theta, c, prob.k);
    double l = fgc_analytic_bound(prob, x_tilde, term.theta_c);
    // The estimates are loose but not certified; verify and double if needed.
    return detail::backtrack_step(l, objective_at_c, grad, candidate, objective, c,
                                  nullptr, nullptr);
  }
  return detail::backtrack_step(l_hint, objective_at_c, grad, candidate, objective, c,
                                nullptr, nullptr);
}

Eigen::MatrixXd fgc_xtilde_closed_form(const FgcProblem& prob, const Eigen::MatrixXd& c) {
  const Eigen::MatrixXd theta_c = c.transpose() * (*prob.theta * c);
  Eigen::MatrixXd system = (2.0 / prob.alpha) * theta_c;
  system.noalias() += c.transpose() * c;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (system + system.transpose()));
  if (llt.info() != Eigen::Success) {
    throw SolverError("(2/alpha) C^T Theta C + C^T C is singular; empty supernode");
  }
  return llt.solve(c.transpose() * (*prob.x));
}

KktReport check_kkt_fgc(const FgcProblem& prob, const Eigen::MatrixXd& c,
                        const Eigen::MatrixXd& x_tilde, double tol, double l_ref) {
  KktReport report;
  const double l = std::max(l_ref, 1e-12);
  const Eigen::MatrixXd grad = grad_c_fgc(prob, c, x_tilde);
  std::vector<Eigen::Index> zero_rows;
  const Eigen::MatrixXd next = project_nonneg_rowscaled(c - grad / l, &zero_rows);
  report.c_residual = l * (c - next).norm();

  const Eigen::MatrixXd theta_c = c.transpose() * (*prob.theta * c);
  const Eigen::MatrixXd x_grad =
      2.0 * theta_c * x_tilde + prob.alpha * (c.transpose() * (c * x_tilde - *prob.x));
  report.x_residual = x_grad.norm();
  report.stationary = report.c_residual < tol && report.x_residual < tol;
  return report;
}

}  // namespace coarsenkit
