#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coarsenkit/metrics.hpp"
#include "coarsenkit/solver.hpp"

namespace coarsenkit {

/// Reads a whitespace-separated edge list (`src dst weight`, 0-indexed,
/// positive weights, `#` comments) plus an optional CSV feature file whose
/// row i belongs to node i. Duplicate and reversed entries merge by maximum
/// weight. Node ids must densely cover 0..p-1.
GraphData load_graph(const std::string& edge_path,
                     const std::optional<std::string>& feature_path = std::nullopt,
                     std::string name = {}, bool require_connected = true);

/// Writes the edge list of a graph in load_graph's format (i < j, sorted).
void write_graph(const GraphData& graph, const std::string& edge_path);

Eigen::MatrixXd load_features_csv(const std::string& path);
void write_features_csv(const Eigen::MatrixXd& features, const std::string& path);

/// One integer label per line, node order, `#` comments allowed.
std::vector<int> load_labels(const std::string& path);

/// Everything one solver run produces, ready for serialization.
struct ReportBundle {
  std::string algo;
  std::string dataset;
  MetricReport metrics;
  SolverConfig config;
  double log_re = 0.0;
  double wall_time = 0.0;
  int p = 0;
  int k = 0;
  std::vector<double> spectrum_original;
  std::vector<double> spectrum_coarse;
  std::vector<double> loss;                 // objective per outer iteration
  Eigen::MatrixXd ctc;                      // k x k C^T C of the rounded loading
  std::vector<int> assignment;              // supernode per node
};

/// Writes metrics.json, spectrum_original.csv, spectrum_coarse.csv, loss.csv,
/// ctc_heatmap.csv and assignment.csv under out_dir (created if missing).
/// CSV floats carry 17 significant digits.
void write_report(const ReportBundle& bundle, const std::string& out_dir);

/// Round-trip reader for metrics.json (returns the raw JSON text parsed into
/// the fields of MetricReport plus seed); used by tests and downstream tools.
struct MetricsFile {
  MetricReport metrics;
  double log_re = 0.0;
  std::uint64_t seed = 0;
  std::string algo;
};
MetricsFile load_metrics_json(const std::string& path);

}  // namespace coarsenkit
