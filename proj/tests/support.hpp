#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "coarsenkit/graph.hpp"
#include "coarsenkit/rng.hpp"

namespace coarsenkit::testing {

/// Random connected weighted graph: a random spanning tree plus extra edges
/// at the given density. Independent of the datagen module on purpose, so it
/// can serve as an oracle-side generator.
inline GraphData random_connected_graph(int p, double extra_density, double w_lo, double w_hi,
                                        Rng& rng) {
  std::vector<Eigen::Triplet<double>> triplets;
  auto add_edge = [&](int i, int j, double w) {
    triplets.emplace_back(i, j, w);
    triplets.emplace_back(j, i, w);
  };
  for (int v = 1; v < p; ++v) {
    const int u = static_cast<int>(rng.integer(static_cast<std::uint64_t>(v)));
    add_edge(u, v, rng.uniform(w_lo, w_hi));
  }
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (rng.uniform() < extra_density) add_edge(i, j, rng.uniform(w_lo, w_hi));
    }
  }
  SpMat weights(p, p);
  // duplicate tree/extra edges collapse by keeping the max, mirroring load_graph
  weights.setFromTriplets(triplets.begin(), triplets.end(),
                          [](double a, double b) { return std::max(a, b); });
  return make_graph_data(laplacian_from_weights(weights), std::nullopt, "random");
}

/// Random Binary-form loading matrix with every column nonempty (p >= k).
inline LoadingMatrix random_binary_loading(int p, int k, Rng& rng) {
  LoadingMatrix c;
  c.form = LoadingForm::Binary;
  c.entries = Eigen::MatrixXd::Zero(p, k);
  std::vector<int> order(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = p - 1; i > 0; --i) {
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(rng.integer(static_cast<std::uint64_t>(i + 1)))]);
  }
  for (int j = 0; j < k; ++j) c.entries(order[static_cast<std::size_t>(j)], j) = 1.0;
  for (int i = k; i < p; ++i) {
    c.entries(order[static_cast<std::size_t>(i)],
              static_cast<Eigen::Index>(rng.integer(static_cast<std::uint64_t>(k)))) = 1.0;
  }
  return c;
}

/// Sum of weights between supernode groups, accumulated edge by edge; the
/// aggregation oracle for coarsen_laplacian.
inline Eigen::MatrixXd aggregate_coarse_laplacian(const SpMat& theta,
                                                  const std::vector<int>& group, int k) {
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(k, k);
  for (int col = 0; col < theta.outerSize(); ++col) {
    for (SpMat::InnerIterator it(theta, col); it; ++it) {
      if (it.row() >= it.col()) continue;
      const int a = group[static_cast<std::size_t>(it.row())];
      const int b = group[static_cast<std::size_t>(it.col())];
      if (a == b) continue;
      weights(a, b) += -it.value();
      weights(b, a) += -it.value();
    }
  }
  Eigen::MatrixXd lap = -weights;
  for (int i = 0; i < k; ++i) lap(i, i) = weights.row(i).sum();
  return lap;
}

/// Central finite differences of a scalar function of a matrix.
inline Eigen::MatrixXd finite_difference_gradient(
    const std::function<double(const Eigen::MatrixXd&)>& f, const Eigen::MatrixXd& at,
    double h = 1e-6) {
  Eigen::MatrixXd grad(at.rows(), at.cols());
  Eigen::MatrixXd probe = at;
  for (Eigen::Index i = 0; i < at.rows(); ++i) {
    for (Eigen::Index j = 0; j < at.cols(); ++j) {
      probe(i, j) = at(i, j) + h;
      const double up = f(probe);
      probe(i, j) = at(i, j) - h;
      const double down = f(probe);
      probe(i, j) = at(i, j);
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

/// max |a-b| / max(1, ||b||_inf): the relative error measure used by the
/// gradient suite.
inline double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// The worked 5-node example: weights w1..w5 on edges
/// (0,3),(0,1),(0,2),(1,2),(2,4).
inline SpMat toy_laplacian() {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5, 5);
  w(0, 3) = w(3, 0) = 1.0;
  w(0, 1) = w(1, 0) = 2.0;
  w(0, 2) = w(2, 0) = 3.0;
  w(1, 2) = w(2, 1) = 4.0;
  w(2, 4) = w(4, 2) = 5.0;
  return laplacian_from_weights(w);
}

inline Eigen::MatrixXd toy_features() {
  Eigen::MatrixXd x(5, 2);
  x << 0.4, 0.7, 0.2, 0.6, 0.5, 0.2, 0.1, 0.3, 0.3, 0.6;
  return x;
}

inline LoadingMatrix toy_loading() {
  LoadingMatrix c;
  c.form = LoadingForm::Binary;
  c.entries = Eigen::MatrixXd::Zero(5, 3);
  c.entries(0, 0) = c.entries(1, 0) = c.entries(2, 0) = 1.0;
  c.entries(3, 1) = 1.0;
  c.entries(4, 2) = 1.0;
  return c;
}

}  // namespace coarsenkit::testing
