#include <doctest.h>

#include <cmath>

#include "coarsenkit/solver.hpp"
#include "support.hpp"

using namespace coarsenkit;
using namespace coarsenkit::testing;

namespace {

struct SmallProblem {
  GraphData graph;
  Eigen::MatrixXd x;
  Eigen::MatrixXd c;
  Eigen::MatrixXd x_tilde;
  FgcProblem prob;
};

SmallProblem make_small_problem(Rng& rng, int p, int k, double gamma, double alpha,
                                double lambda) {
  SmallProblem out{random_connected_graph(p, 0.3, 0.5, 3.0, rng), {}, {}, {}, {}};
  out.x.resize(p, 3);
  for (Eigen::Index i = 0; i < out.x.size(); ++i) out.x.data()[i] = rng.normal();
  out.c.resize(p, k);
  for (Eigen::Index i = 0; i < out.c.size(); ++i) out.c.data()[i] = rng.uniform();
  out.c = project_nonneg_rowscaled(out.c);
  out.prob = FgcProblem{&out.graph.laplacian, &out.x, gamma, alpha, lambda, k};
  out.x_tilde = fgc_xtilde_closed_form(out.prob, out.c);
  return out;
}

}  // namespace

TEST_CASE("row-scaled nonnegative projection") {
  SUBCASE("mixed-sign row") {
    Eigen::MatrixXd a(1, 3);
    a << 0.5, -0.2, 0.3;
    const Eigen::MatrixXd out = project_nonneg_rowscaled(a);
    const double norm = std::sqrt(0.38);
    CHECK(out(0, 0) == doctest::Approx(0.5 / norm).epsilon(1e-12));
    CHECK(out(0, 1) == 0.0);
    CHECK(out(0, 2) == doctest::Approx(0.3 / norm).epsilon(1e-12));
  }
  SUBCASE("all-negative row becomes zero and is flagged") {
    Eigen::MatrixXd a(1, 2);
    a << -1.0, -2.0;
    std::vector<Eigen::Index> zeros;
    const Eigen::MatrixXd out = project_nonneg_rowscaled(a, &zeros);
    CHECK(out.isZero(0.0));
    CHECK(zeros == std::vector<Eigen::Index>{0});
  }
  SUBCASE("unit nonnegative row is a fixed point") {
    Eigen::MatrixXd a(1, 3);
    a << 1.0, 0.0, 0.0;
    CHECK((project_nonneg_rowscaled(a) - a).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("zero row throws without a flag sink") {
    CHECK_THROWS_AS(project_nonneg_rowscaled(Eigen::MatrixXd::Zero(2, 2)), SolverError);
  }
  SUBCASE("every output row has norm at most one and is nonnegative") {
    Rng rng(9);
    Eigen::MatrixXd a(20, 6);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    std::vector<Eigen::Index> zeros;
    const Eigen::MatrixXd out = project_nonneg_rowscaled(a, &zeros);
    CHECK((out.array() >= 0.0).all());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      CHECK(out.row(i).norm() <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("objective value matches a term-by-term recomputation") {
  Rng rng(12);
  const SmallProblem sp = make_small_problem(rng, 10, 4, 1.5, 2.0, 0.7);

  const Eigen::MatrixXd theta(sp.graph.laplacian);
  const Eigen::MatrixXd theta_c = sp.c.transpose() * theta * sp.c;
  const Eigen::MatrixXd shifted = theta_c + Eigen::MatrixXd::Constant(4, 4, 1.0 / 4.0);
  const double logdet = std::log(shifted.determinant());
  const double smooth = (sp.x_tilde.transpose() * theta_c * sp.x_tilde).trace();
  const double fidelity = 0.5 * 2.0 * (sp.c * sp.x_tilde - sp.x).squaredNorm();
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < sp.c.rows(); ++i) {
    const double row_sum = sp.c.row(i).sum();
    penalty += row_sum * row_sum;
  }
  penalty *= 0.5 * 0.7;
  const double expected = -1.5 * logdet + smooth + fidelity + penalty;

  CHECK(objective_fgc(sp.prob, sp.c, sp.x_tilde) == doctest::Approx(expected).epsilon(1e-10));

  SUBCASE("binary loading on a connected graph stays finite") {
    const LoadingMatrix binary = random_binary_loading(10, 4, rng);
    const Eigen::MatrixXd xt = fgc_xtilde_closed_form(sp.prob, binary.entries);
    CHECK(std::isfinite(objective_fgc(sp.prob, binary.entries, xt)));
  }
  SUBCASE("empty column fails the positive-definite check") {
    // one-hot rows keep C 1_k = 1_p, so an empty supernode makes
    // C^T Theta C + J genuinely rank deficient
    LoadingMatrix binary = random_binary_loading(10, 4, rng);
    Eigen::MatrixXd c = binary.entries;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      if (c(i, 2) == 1.0) {
        c(i, 2) = 0.0;
        c(i, 0) = 1.0;
      }
    }
    CHECK(objective_fgc(sp.prob, c, sp.x_tilde) == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(grad_c_fgc(sp.prob, c, sp.x_tilde), SolverError);
  }
}

TEST_CASE("loading-matrix gradient matches finite differences") {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const int p = 8 + static_cast<int>(rng.integer(3));
    const int k = 3;
    SmallProblem sp = make_small_problem(rng, p, k, 1.2, 0.8, 0.5);
    const auto f = [&](const Eigen::MatrixXd& c) {
      return objective_fgc(sp.prob, c, sp.x_tilde);
    };
    const Eigen::MatrixXd analytic = grad_c_fgc(sp.prob, sp.c, sp.x_tilde);
    const Eigen::MatrixXd numeric = finite_difference_gradient(f, sp.c);
    CHECK(max_relative_error(numeric, analytic) < 1e-5);

    const FgcCache cache = make_fgc_cache(sp.prob, sp.x_tilde);
    const Eigen::MatrixXd cached = grad_c_fgc(sp.prob, sp.c, sp.x_tilde, &cache);
    CHECK((cached - analytic).cwiseAbs().maxCoeff() <= 1e-10 * analytic.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("row penalty gradient has the broadcast closed form") {
  Rng rng(14);
  SmallProblem sp = make_small_problem(rng, 8, 3, 1.0, 1.0, 3.0);
  const Eigen::MatrixXd with_penalty = grad_c_fgc(sp.prob, sp.c, sp.x_tilde);
  FgcProblem no_penalty = sp.prob;
  no_penalty.lambda = 0.0;
  const Eigen::MatrixXd without_penalty = grad_c_fgc(no_penalty, sp.c, sp.x_tilde);
  const Eigen::MatrixXd penalty_part = with_penalty - without_penalty;
  for (Eigen::Index i = 0; i < sp.c.rows(); ++i) {
    const double expected = 3.0 * sp.c.row(i).sum();
    for (Eigen::Index j = 0; j < sp.c.cols(); ++j) {
      CHECK(penalty_part(i, j) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("step length policies") {
  Rng rng(15);
  SmallProblem sp = make_small_problem(rng, 10, 4, 1.0, 2.5, 0.9);
  const double f0 = objective_fgc(sp.prob, sp.c, sp.x_tilde);
  const Eigen::MatrixXd grad = grad_c_fgc(sp.prob, sp.c, sp.x_tilde);

  SUBCASE("fixed inverse-k returns k") {
    FgcProblem big = sp.prob;
    big.k = 812;
    CHECK(fgc_step_length(big, sp.c, sp.x_tilde, grad, f0, StepRule::FixedInverseK, 1.0) ==
          812.0);
  }
  SUBCASE("backtracking on a pure quadratic stays within 2x of the Hessian norm") {
    const double alpha = sp.prob.alpha;
    const Eigen::MatrixXd& xt = sp.x_tilde;
    const auto f = [&](const Eigen::MatrixXd& c) {
      return 0.5 * alpha * (c * xt - sp.x).squaredNorm();
    };
    const Eigen::MatrixXd hess = alpha * (xt * xt.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess, Eigen::EigenvaluesOnly);
    const double l_true = es.eigenvalues().maxCoeff();
    const Eigen::MatrixXd g = alpha * (sp.c * xt - sp.x) * xt.transpose();
    const auto candidate = [&](double l) {
      std::vector<Eigen::Index> zeros;
      return project_nonneg_rowscaled(sp.c - g / l, &zeros);
    };
    const double l = detail::backtrack_step(1e-3 * l_true, f(sp.c), g, candidate, f, sp.c,
                                            nullptr, nullptr);
    CHECK(l <= 2.0 * l_true * (1.0 + 1e-9));
  }
  SUBCASE("majorization inequality holds at the returned step on random iterates") {
    for (int trial = 0; trial < 100; ++trial) {
      SmallProblem q = make_small_problem(rng, 8, 3, 0.9, 1.1, 0.6);
      const double f_at = objective_fgc(q.prob, q.c, q.x_tilde);
      const Eigen::MatrixXd g = grad_c_fgc(q.prob, q.c, q.x_tilde);
      const StepRule rule = trial % 2 == 0 ? StepRule::Backtracking : StepRule::AnalyticBound;
      const double l = fgc_step_length(q.prob, q.c, q.x_tilde, g, f_at, rule, 1.0);
      std::vector<Eigen::Index> zeros;
      const Eigen::MatrixXd next = project_nonneg_rowscaled(q.c - g / l, &zeros);
      const Eigen::MatrixXd delta = next - q.c;
      const double majorizer =
          f_at + (g.cwiseProduct(delta)).sum() + 0.5 * l * delta.squaredNorm();
      const double f_next = objective_fgc(q.prob, next, q.x_tilde);
      CHECK(f_next <= majorizer + 1e-8 * std::max(1.0, std::abs(majorizer)));
    }
  }
}

TEST_CASE("closed-form feature solve is stationary") {
  Rng rng(16);
  SmallProblem sp = make_small_problem(rng, 9, 3, 1.0, 1.5, 0.4);
  const Eigen::MatrixXd theta_c = sp.c.transpose() * (sp.graph.laplacian * sp.c);
  const Eigen::MatrixXd residual =
      2.0 * theta_c * sp.x_tilde +
      sp.prob.alpha * (sp.c.transpose() * (sp.c * sp.x_tilde - sp.x));
  CHECK(residual.cwiseAbs().maxCoeff() <= 1e-8);

  const KktReport report = check_kkt_fgc(sp.prob, sp.c, sp.x_tilde, 1e-8, 1.0);
  CHECK(report.x_residual <= 1e-8);
}

TEST_CASE("kkt check rejects random iterates") {
  Rng rng(18);
  SmallProblem sp = make_small_problem(rng, 10, 4, 1.0, 1.0, 1.0);
  const KktReport report = check_kkt_fgc(sp.prob, sp.c, sp.x_tilde, 1e-4, 1.0);
  CHECK_FALSE(report.stationary);
  CHECK(report.c_residual > 1e-2);
}

TEST_CASE("solver config validation") {
  SolverConfig config;
  CHECK_NOTHROW(config.validate());
  SUBCASE("nonpositive weights rejected") {
    config.gamma = 0.0;
    CHECK_THROWS_AS(config.validate(), ArgumentError);
  }
  SUBCASE("ratio bounds") {
    config.ratio = 1.0;
    CHECK_THROWS_AS(config.validate(), ArgumentError);
    config.ratio = 0.0;
    CHECK_THROWS_AS(config.validate(), ArgumentError);
  }
  SUBCASE("reduction ratio needed by the reduced solver") {
    CHECK_THROWS_AS(config.validate(true), ArgumentError);
    config.reduction_ratio = 0.5;
    CHECK_NOTHROW(config.validate(true));
  }
  SUBCASE("supernode count") {
    config.ratio = 0.3;
    CHECK(config.supernode_count(2708) == 812);
    CHECK(config.supernode_count(10) == 3);
    config.ratio = 0.9;
    CHECK(config.supernode_count(3) == 2);  // capped at p-1
  }
}
