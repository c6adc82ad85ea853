#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <optional>
#include <string>
#include <vector>

#include "coarsenkit/errors.hpp"

namespace coarsenkit {

using SpMat = Eigen::SparseMatrix<double>;

/// An undirected weighted graph held as its combinatorial Laplacian, plus an
/// optional node-feature matrix (row i = features of node i).
///
/// Construct through make_graph_data so the Laplacian invariants (symmetry,
/// nonpositive off-diagonals, zero row sums, connectivity) are enforced.
struct GraphData {
  int p = 0;
  SpMat laplacian;
  std::optional<Eigen::MatrixXd> features;
  std::string name;

  bool has_features() const { return features.has_value(); }
  int feature_dim() const { return has_features() ? static_cast<int>(features->cols()) : 0; }
};

enum class LoadingForm { Relaxed, Binary };

/// Node-to-supernode map C (p x k, entrywise nonnegative).
/// Binary form: one entry per row equal to 1, no empty column.
/// Relaxed form: nonnegative with row 2-norms at most 1.
struct LoadingMatrix {
  Eigen::MatrixXd entries;
  LoadingForm form = LoadingForm::Relaxed;

  int p() const { return static_cast<int>(entries.rows()); }
  int k() const { return static_cast<int>(entries.cols()); }

  /// Supernode index per node; Binary form only.
  std::vector<int> assignment() const;

  /// Nodes mapped to each supernode (diagonal of C^T C); Binary form only.
  std::vector<int> group_sizes() const;
};

struct CoarsenedGraph {
  int k = 0;
  Eigen::MatrixXd laplacian_c;
  std::optional<Eigen::MatrixXd> features_c;
  LoadingMatrix loading;
  std::optional<Eigen::MatrixXd> reduced_features;  // W (k x d)
  std::optional<Eigen::MatrixXd> transform;         // H (d x n)
};

// ---------------------------------------------------------------------------
// Validation helpers
// ---------------------------------------------------------------------------

/// Checks symmetry (exact as stored), nonpositive off-diagonals and zero row
/// sums (|sum| <= 1e-9 * max diagonal). Throws ValidationError on violation.
void validate_laplacian_structure(const SpMat& theta);

/// Connectivity of the graph underlying a structurally valid Laplacian,
/// decided by breadth-first search over the off-diagonal pattern.
bool is_connected(const SpMat& theta);

/// Number of eigenvalues below 1e-9 * lambda_max of a symmetric PSD matrix.
/// A connected k-node Laplacian has exactly one.
int count_near_zero_eigenvalues(const Eigen::MatrixXd& sym);

/// Throws ValidationError unless c is a valid Binary-form loading matrix:
/// entries in {0,1}, exactly one 1 per row, no empty column.
void validate_binary_loading(const LoadingMatrix& c);

/// Builds a GraphData after validating the Laplacian and the feature shape.
/// require_connected: reject disconnected graphs (the default for solvers).
GraphData make_graph_data(SpMat laplacian, std::optional<Eigen::MatrixXd> features,
                          std::string name = {}, bool require_connected = true);

// ---------------------------------------------------------------------------
// Coarsening algebra
// ---------------------------------------------------------------------------

/// Laplacian from a symmetric nonnegative weight matrix with zero diagonal:
/// off-diagonal (i,j) = -W_ij, diagonal = row degree.
SpMat laplacian_from_weights(const SpMat& weights);
SpMat laplacian_from_weights(const Eigen::MatrixXd& weights);

/// Theta_c = C^T Theta C for a Binary-form loading matrix, accumulated over
/// the nonzeros of Theta (equals the supernode weight aggregation).
Eigen::MatrixXd coarsen_laplacian(const SpMat& theta, const LoadingMatrix& c);

/// P = (C^T C)^{-1} C^T, the pseudo-inverse of a Binary-form C. Row j holds
/// 1/d_j on the nodes of supernode j, so P C = I and rows sum to 1.
SpMat coarsening_matrix(const LoadingMatrix& c);

/// X_tilde = P X: supernode features are the means of their member rows.
Eigen::MatrixXd coarsen_features(const Eigen::MatrixXd& x, const LoadingMatrix& c);

/// Theta_lift = P^T Theta_c P, the coarsened Laplacian expanded back to the
/// original node set; entry (i,j) = Theta_c(g(i),g(j)) / (d_g(i) d_g(j)).
Eigen::MatrixXd lift_laplacian(const Eigen::MatrixXd& theta_c, const LoadingMatrix& c);

struct RoundResult {
  LoadingMatrix loading;
  int dropped_columns = 0;
  std::vector<int> kept_columns;  // original index of each surviving column
};

/// Snaps a nonnegative relaxed iterate to Binary form: per row the largest
/// entry becomes 1 (ties to the lowest column index). Empty columns are
/// dropped and reported; an all-zero row throws SolverError.
RoundResult round_loading(const Eigen::MatrixXd& c_relaxed);

}  // namespace coarsenkit
