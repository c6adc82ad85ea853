#pragma once

#include <Eigen/Dense>
#include <vector>

#include "coarsenkit/graph.hpp"

namespace coarsenkit {

/// Quality of one (original, coarsened) pair.
struct MetricReport {
  double ree = 0.0;
  double de_original = 0.0;
  double de_coarsened = 0.0;
  double he = 0.0;
  double re = 0.0;
  double epsilon = 0.0;
  int m_used = 0;
};

/// m largest eigenvalues in descending order (full symmetric decomposition;
/// intended for matrices up to a few thousand rows).
std::vector<double> spectrum(const Eigen::MatrixXd& sym, int m);
std::vector<double> spectrum(const SpMat& sym, int m);

/// Mean relative deviation of the top-m eigenvalue pairs. Requires
/// m <= k-1 so no zero eigenvalue of the coarsened Laplacian reaches the
/// comparison or the denominator.
double relative_eigen_error(const SpMat& theta, const Eigen::MatrixXd& theta_c, int m);
double relative_eigen_error(const std::vector<double>& spectrum_original,
                            const std::vector<double>& spectrum_coarse, int m, int k);

/// tr(X^T Theta X).
double dirichlet_energy(const SpMat& theta, const Eigen::MatrixXd& x);
double dirichlet_energy(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& x);

/// arccosh(1 + ||(Theta - Theta_lift) X||_F^2 ||X||_F^2 /
///             (2 tr(X^T Theta X) tr(X^T Theta_lift X))).
/// Throws ValidationError when either Dirichlet energy vanishes.
double hyperbolic_error(const SpMat& theta, const Eigen::MatrixXd& theta_lift,
                        const Eigen::MatrixXd& x);

/// ||Theta - Theta_lift||_F^2.
double reconstruction_error(const SpMat& theta, const Eigen::MatrixXd& theta_lift);

/// Tight epsilon of the similarity bound:
/// | ||X||_Theta - ||X_c||_Theta_c | / ||X||_Theta.
double epsilon_similarity(const SpMat& theta, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& theta_c, const Eigen::MatrixXd& x_c);

/// Eigenvector of the smallest nonzero eigenvalue, used in place of features
/// when a graph has none.
Eigen::VectorXd fiedler_vector(const SpMat& theta);

/// Full report for an (original, coarsened) pair. Works through the factored
/// form of the lifted Laplacian so no p x p dense product with the feature
/// matrix is ever formed. m is clamped to k-1 and recorded in m_used.
/// When the graph has no features the Fiedler vector stands in.
/// The spectrum pointers, if provided, must hold >= m descending eigenvalues
/// of the respective Laplacian (lets callers reuse decompositions).
MetricReport compute_metric_report(const GraphData& graph, const CoarsenedGraph& coarse,
                                   int m_requested,
                                   const std::vector<double>* spectrum_original = nullptr,
                                   const std::vector<double>* spectrum_coarse = nullptr);

}  // namespace coarsenkit
