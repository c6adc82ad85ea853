#include "coarsenkit/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace coarsenkit {

namespace {

std::vector<double> descending_eigenvalues(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  std::vector<double> out(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    out[static_cast<std::size_t>(ev.size() - 1 - i)] = ev(i);
  }
  return out;
}

}  // namespace

std::vector<double> spectrum(const Eigen::MatrixXd& sym, int m) {
  if (m < 0 || m > sym.rows()) {
    throw ArgumentError("requested " + std::to_string(m) + " eigenvalues of a " +
                        std::to_string(sym.rows()) + "-dim matrix");
  }
  std::vector<double> all = descending_eigenvalues(sym);
  all.resize(static_cast<std::size_t>(m));
  return all;
}

std::vector<double> spectrum(const SpMat& sym, int m) {
  return spectrum(Eigen::MatrixXd(sym), m);
}

double relative_eigen_error(const std::vector<double>& spectrum_original,
                            const std::vector<double>& spectrum_coarse, int m, int k) {
  if (m < 1) throw ArgumentError("eigenvalue count m must be positive");
  if (m >= k) {
    throw ArgumentError("m = " + std::to_string(m) + " needs " + std::to_string(m) +
                        " nonzero eigenvalues but the coarsened Laplacian has only " +
                        std::to_string(k - 1));
  }
  if (spectrum_original.size() < static_cast<std::size_t>(m) ||
      spectrum_coarse.size() < static_cast<std::size_t>(m)) {
    throw ArgumentError("spectra shorter than m");
  }
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const double lambda = spectrum_original[static_cast<std::size_t>(i)];
    if (lambda <= 0.0) {
      throw ArgumentError("original eigenvalue " + std::to_string(i) +
                          " is not positive; is the graph connected?");
    }
    total += std::abs(spectrum_coarse[static_cast<std::size_t>(i)] - lambda) / lambda;
  }
  return total / static_cast<double>(m);
}

double relative_eigen_error(const SpMat& theta, const Eigen::MatrixXd& theta_c, int m) {
  const int k = static_cast<int>(theta_c.rows());
  return relative_eigen_error(spectrum(theta, std::min<int>(m, static_cast<int>(theta.rows()))),
                              spectrum(theta_c, std::min(m, k)), m, k);
}

double dirichlet_energy(const SpMat& theta, const Eigen::MatrixXd& x) {
  if (theta.cols() != x.rows()) {
    throw DimensionError("Dirichlet energy: Laplacian is " + std::to_string(theta.rows()) +
                         "-dim but features have " + std::to_string(x.rows()) + " rows");
  }
  return (x.cwiseProduct(theta * x)).sum();
}

double dirichlet_energy(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& x) {
  if (theta.cols() != x.rows()) {
    throw DimensionError("Dirichlet energy: Laplacian is " + std::to_string(theta.rows()) +
                         "-dim but features have " + std::to_string(x.rows()) + " rows");
  }
  return (x.cwiseProduct(theta * x)).sum();
}

namespace {

double hyperbolic_error_terms(double diff_sq, double x_sq, double de_a, double de_b) {
  if (de_a <= 0.0 || de_b <= 0.0) {
    throw ValidationError("hyperbolic error undefined: a Dirichlet energy term is zero "
                          "(constant features?)");
  }
  return std::acosh(1.0 + diff_sq * x_sq / (2.0 * de_a * de_b));
}

}  // namespace

double hyperbolic_error(const SpMat& theta, const Eigen::MatrixXd& theta_lift,
                        const Eigen::MatrixXd& x) {
  if (theta.rows() != theta_lift.rows() || theta.cols() != theta_lift.cols()) {
    throw DimensionError("hyperbolic error: shape mismatch between Theta and Theta_lift");
  }
  if (theta.cols() != x.rows()) {
    throw DimensionError("hyperbolic error: feature rows do not match Theta");
  }
  const Eigen::MatrixXd diff = theta * x - theta_lift * x;
  return hyperbolic_error_terms(diff.squaredNorm(), x.squaredNorm(),
                                dirichlet_energy(theta, x), dirichlet_energy(theta_lift, x));
}

double reconstruction_error(const SpMat& theta, const Eigen::MatrixXd& theta_lift) {
  if (theta.rows() != theta_lift.rows() || theta.cols() != theta_lift.cols()) {
    throw DimensionError("reconstruction error: shape mismatch");
  }
  return (Eigen::MatrixXd(theta) - theta_lift).squaredNorm();
}

double epsilon_similarity(const SpMat& theta, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& theta_c, const Eigen::MatrixXd& x_c) {
  const double de = dirichlet_energy(theta, x);
  if (de <= 0.0) {
    throw ValidationError("epsilon similarity undefined: ||X||_Theta is zero");
  }
  const double norm_original = std::sqrt(de);
  const double norm_coarse = std::sqrt(std::max(dirichlet_energy(theta_c, x_c), 0.0));
  return std::abs(norm_original - norm_coarse) / norm_original;
}

Eigen::VectorXd fiedler_vector(const SpMat& theta) {
  const Eigen::MatrixXd dense(theta);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double tol = 1e-9 * std::max(ev.maxCoeff(), 1e-300);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > tol) return es.eigenvectors().col(i);
  }
  throw ValidationError("no nonzero eigenvalue found; graph has no Fiedler vector");
}

MetricReport compute_metric_report(const GraphData& graph, const CoarsenedGraph& coarse,
                                   int m_requested,
                                   const std::vector<double>* spectrum_original,
                                   const std::vector<double>* spectrum_coarse) {
  const int k = coarse.k;
  MetricReport report;
  report.m_used = std::min(m_requested, k - 1);
  if (report.m_used < 1) {
    throw ArgumentError("coarsened graph too small for eigenvalue comparison (k = " +
                        std::to_string(k) + ")");
  }

  std::vector<double> spec_orig;
  if (spectrum_original) {
    if (spectrum_original->size() < static_cast<std::size_t>(report.m_used)) {
      throw ArgumentError("cached original spectrum shorter than m");
    }
    spec_orig = *spectrum_original;
  } else {
    spec_orig = spectrum(graph.laplacian, std::min<int>(report.m_used, graph.p));
  }
  std::vector<double> spec_coarse;
  if (spectrum_coarse) {
    if (spectrum_coarse->size() < static_cast<std::size_t>(report.m_used)) {
      throw ArgumentError("cached coarse spectrum shorter than m");
    }
    spec_coarse = *spectrum_coarse;
  } else {
    spec_coarse = spectrum(coarse.laplacian_c, std::min(report.m_used, k));
  }
  report.ree = relative_eigen_error(spec_orig, spec_coarse, report.m_used, k);

  Eigen::MatrixXd x;
  if (graph.has_features()) {
    x = *graph.features;
  } else {
    x = fiedler_vector(graph.laplacian);
  }
  const SpMat pmat = coarsening_matrix(coarse.loading);
  const Eigen::MatrixXd x_tilde = coarse.features_c ? *coarse.features_c : Eigen::MatrixXd(pmat * x);

  report.de_original = dirichlet_energy(graph.laplacian, x);
  report.de_coarsened = dirichlet_energy(coarse.laplacian_c, x_tilde);

  // (Theta - P^T Theta_c P) X without forming the dense lift.
  const Eigen::MatrixXd lift_x = pmat.transpose() * (coarse.laplacian_c * (pmat * x));
  const Eigen::MatrixXd diff = graph.laplacian * x - lift_x;
  const double de_lift = (x.cwiseProduct(lift_x)).sum();
  report.he = hyperbolic_error_terms(diff.squaredNorm(), x.squaredNorm(),
                                     report.de_original, de_lift);

  // ||Theta - Theta_lift||_F^2 expanded so only k x k products appear:
  //   ||Theta||_F^2 - 2 tr(P Theta P^T Theta_c) + tr((Theta_c P P^T)^2).
  const SpMat p_theta = pmat * graph.laplacian;
  const Eigen::MatrixXd mid = Eigen::MatrixXd(SpMat(p_theta * pmat.transpose()));
  const Eigen::VectorXd pp_diag =
      Eigen::MatrixXd(SpMat(pmat * pmat.transpose())).diagonal();
  const Eigen::MatrixXd theta_c_scaled = coarse.laplacian_c * pp_diag.asDiagonal();
  double re = graph.laplacian.squaredNorm();
  re -= 2.0 * (mid.cwiseProduct(coarse.laplacian_c)).sum();
  re += (theta_c_scaled * theta_c_scaled).trace();
  report.re = std::max(re, 0.0);

  report.epsilon = epsilon_similarity(graph.laplacian, x, coarse.laplacian_c, x_tilde);
  return report;
}

}  // namespace coarsenkit
