#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coarsenkit/solver.hpp"

namespace coarsenkit::cli {

struct CoarsenArgs {
  std::string algo;  // fgc | gc | two-stage | fgcr
  std::string edges;
  std::optional<std::string> features;
  SolverConfig config;
  std::string out_dir;
};

/// Runs the chosen solver end to end and writes the report set under
/// out_dir. Returns 0; failures surface as coarsenkit::Error.
int run_coarsen(const CoarsenArgs& args);

struct GenerateArgs {
  std::string model;  // er | ba | ws | rgg
  int p = 0;
  double prob = 0.1;        // er
  int m_attach = 5;         // ba
  int k_ring = 4;           // ws
  double rewire = 0.0;      // ws
  double radius = 0.1;      // rgg
  double weight_lo = 1.0;
  double weight_hi = 10.0;
  std::optional<int> gmrf_dim;
  std::optional<double> perturb;
  std::uint64_t seed = 0;
  std::string out_dir;
};

/// Writes edges.txt (and features.csv when gmrf_dim is set) under out_dir.
/// Features are sampled from the clean Laplacian before any perturbation.
int run_generate(const GenerateArgs& args);

struct ClusterArgs {
  std::string edges;
  std::optional<std::string> features;
  std::optional<std::string> labels;
  int classes = 2;
  std::optional<int> gmrf_dim;
  SolverConfig config;
  std::string out_dir;
};

struct ClusterOutcome {
  std::vector<int> assignment;
  int misclassified = -1;  // -1 when no labels were given
};

/// Featured coarsening down to `classes` supernodes; with labels, reports the
/// misclassification count under the best label permutation (classes <= 6).
ClusterOutcome run_cluster(const ClusterArgs& args);

/// Grouping backend: `restarts` independent solver runs (seeds derived from
/// config.seed); keeps the run whose rounded result scores the lowest
/// objective. Runs that collapse below `classes` groups are discarded.
std::vector<int> cluster_assignments(const GraphData& graph, const SolverConfig& config,
                                     int classes, int restarts = 8);

}  // namespace coarsenkit::cli
