#include <doctest.h>

#include <cmath>

#include "coarsenkit/datagen.hpp"
#include "coarsenkit/fgc.hpp"
#include "coarsenkit/gc.hpp"
#include "coarsenkit/metrics.hpp"
#include "support.hpp"

using namespace coarsenkit;
using namespace coarsenkit::testing;

namespace {

SolverConfig gc_config(std::uint64_t seed) {
  SolverConfig config;
  config.gamma = 50.0;
  config.alpha = 1.0;  // unused by the featureless objective, must stay positive
  config.lambda = 4.0;
  config.ratio = 0.5;
  config.outer_iters = 30;
  config.inner_iters = 60;
  config.tol = 1e-9;
  config.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("featureless gradient matches finite differences") {
  Rng rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    const int p = 8 + static_cast<int>(rng.integer(4));
    const int k = 3;
    const GraphData g = random_connected_graph(p, 0.3, 0.5, 3.0, rng);
    Eigen::MatrixXd c(p, k);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform();
    c = project_nonneg_rowscaled(c);
    const GcProblem prob{&g.laplacian, 1.4, 0.8, k};
    const auto f = [&](const Eigen::MatrixXd& v) { return objective_gc(prob, v); };
    CHECK(max_relative_error(finite_difference_gradient(f, c), grad_c_gc(prob, c)) < 1e-5);
  }
}

TEST_CASE("featureless solve on the toy graph is feasible") {
  GraphData g = make_graph_data(toy_laplacian(), std::nullopt, "toy");
  SolverConfig config = gc_config(1);
  config.ratio = 0.6;  // k = 3
  const GcResult result = gc_solve(g, config);
  CHECK(result.coarsened.k <= 3);
  CHECK(result.coarsened.k >= 2);
  CHECK_NOTHROW(validate_binary_loading(result.coarsened.loading));
  CHECK(count_near_zero_eigenvalues(result.coarsened.laplacian_c) == 1);
}

TEST_CASE("objective decreases on a rewired ring graph") {
  const GraphData g = generate_graph(WsModel{30, 4, 0.2}, WeightRange{1.0, 5.0}, 13);
  SolverConfig config = gc_config(2);
  const GcResult result = gc_solve(g, config);
  REQUIRE(result.trace.objective.size() >= 2);
  for (std::size_t i = 1; i < result.trace.objective.size(); ++i) {
    CHECK(result.trace.objective[i] <= result.trace.objective[i - 1] + 1e-8);
  }
  CHECK(result.trace.objective.back() < result.trace.objective.front());
  // features on the input are ignored; rerunning with features attached
  // must give the same loading matrix
  GraphData with_features = g;
  with_features.features = sample_gmrf_features(g.laplacian, 8, 4);
  const GcResult again = gc_solve(with_features, config);
  CHECK((again.coarsened.loading.entries - result.coarsened.loading.entries)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("two random initializations land on nearby objective values") {
  // The relaxed problem is not convex over the whole space (see the strict
  // convexity caveat), so agreement is checked on an instance whose optimum
  // is sharply dominant: merging the single overwhelmingly heavy pair.
  Rng rng(77);
  GraphData base = random_connected_graph(10, 0.3, 1.0, 2.0, rng);
  Eigen::MatrixXd wm = -Eigen::MatrixXd(base.laplacian);
  wm.diagonal().setZero();
  wm(3, 7) = wm(7, 3) = 50.0;
  const GraphData g = make_graph_data(laplacian_from_weights(wm), std::nullopt, "merge");

  SolverConfig config = gc_config(100);
  config.ratio = 0.9;  // k = 9: exactly one merge
  config.outer_iters = 60;
  config.inner_iters = 100;
  const GcResult a = gc_solve(g, config);
  config.seed = 200;
  const GcResult b = gc_solve(g, config);
  const double fa = a.trace.objective.back();
  const double fb = b.trace.objective.back();
  CHECK(std::abs(fa - fb) <= 1e-4 * std::max(std::abs(fa), std::abs(fb)));
}

TEST_CASE("smooth feature stage") {
  Rng rng(81);
  const GraphData g = random_connected_graph(18, 0.25, 1.0, 3.0, rng);
  const LoadingMatrix c = random_binary_loading(18, 6, rng);
  const Eigen::MatrixXd theta_c = coarsen_laplacian(g.laplacian, c);
  Eigen::MatrixXd x_tilde(6, 4);
  for (Eigen::Index i = 0; i < x_tilde.size(); ++i) x_tilde.data()[i] = rng.normal();

  SUBCASE("stationarity of the closed form") {
    const Eigen::MatrixXd x_c = smooth_features(theta_c, x_tilde);
    const Eigen::MatrixXd residual = 2.0 * theta_c * x_c + 2.0 * (x_c - x_tilde);
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("zero Laplacian passes features through") {
    const Eigen::MatrixXd x_c = smooth_features(Eigen::MatrixXd::Zero(6, 6), x_tilde);
    CHECK((x_c - x_tilde).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("smoothing lowers the Dirichlet energy") {
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd xt(6, 4);
      for (Eigen::Index i = 0; i < xt.size(); ++i) xt.data()[i] = rng.normal();
      const Eigen::MatrixXd x_c = smooth_features(theta_c, xt);
      CHECK(dirichlet_energy(theta_c, x_c) <= dirichlet_energy(theta_c, xt) + 1e-10);
    }
  }
  SUBCASE("applying the map twice differs from once") {
    const Eigen::MatrixXd once = smooth_features(theta_c, x_tilde);
    const Eigen::MatrixXd twice = smooth_features(theta_c, once);
    CHECK((twice - once).cwiseAbs().maxCoeff() > 1e-8);
  }
}

TEST_CASE("two-stage pipeline") {
  const GraphData base = generate_graph(ErModel{40, 0.2}, WeightRange{1.0, 5.0}, 31);

  SUBCASE("features required") {
    CHECK_THROWS_AS(two_stage_solve(base, gc_config(0)), ArgumentError);
  }

  GraphData g = base;
  g.features = sample_gmrf_features(g.laplacian, 20, 9);

  SUBCASE("produces smooth coarse features") {
    SolverConfig config = gc_config(5);
    const GcResult result = two_stage_solve(g, config);
    REQUIRE(result.coarsened.features_c.has_value());
    const Eigen::MatrixXd x_tilde = coarsen_features(*g.features, result.coarsened.loading);
    const Eigen::MatrixXd expected = smooth_features(result.coarsened.laplacian_c, x_tilde);
    CHECK((*result.coarsened.features_c - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("featured solve beats the two-stage pipeline on hyperbolic error") {
    // paired runs over 5 seeds; compare medians, mirroring the reported ordering
    std::vector<double> he_fgc, he_two;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      SolverConfig config;
      config.gamma = 50.0;
      config.alpha = 500.0;
      config.lambda = 500.0;
      config.ratio = 0.4;
      config.outer_iters = 30;
      config.inner_iters = 60;
      config.tol = 1e-9;
      config.seed = seed;

      const FgcResult fgc = fgc_solve(g, config);
      const GcResult two = two_stage_solve(g, config);
      he_fgc.push_back(compute_metric_report(g, fgc.coarsened, 100).he);
      he_two.push_back(compute_metric_report(g, two.coarsened, 100).he);
    }
    std::sort(he_fgc.begin(), he_fgc.end());
    std::sort(he_two.begin(), he_two.end());
    CHECK(he_fgc[2] <= he_two[2]);
  }
}
