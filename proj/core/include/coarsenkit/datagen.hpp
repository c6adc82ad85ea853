#pragma once

#include <cstdint>
#include <variant>

#include "coarsenkit/graph.hpp"

namespace coarsenkit {

struct ErModel {
  int p = 0;
  double prob = 0.0;
};
struct BaModel {
  int p = 0;
  int m_attach = 0;
};
struct WsModel {
  int p = 0;
  int k_ring = 0;
  double rewire_prob = 0.0;
};
struct RggModel {
  int p = 0;
  double radius = 0.0;
};

using GraphModel = std::variant<ErModel, BaModel, WsModel, RggModel>;

struct WeightRange {
  double lo = 1.0;
  double hi = 10.0;
};

/// Connected weighted random graph with uniform weights in [lo, hi].
/// Models that can come out disconnected (ER, WS, RGG) are resampled up to
/// 100 times before giving up with SolverError.
GraphData generate_graph(const GraphModel& model, WeightRange weights, std::uint64_t seed);

/// n i.i.d. columns from the degenerate Gaussian N(0, Theta^dagger): noise is
/// scaled by 1/sqrt(lambda_i) on each nonzero eigenpair and the constant
/// eigenvector carries no mass, so every column sums to zero.
Eigen::MatrixXd sample_gmrf_features(const SpMat& theta, int n, std::uint64_t seed);

/// Adds round(rate * m) uniformly chosen non-edges with weight 1, leaving the
/// original edges untouched.
GraphData perturb_edges(const GraphData& graph, double perturbation_rate, std::uint64_t seed);

}  // namespace coarsenkit
