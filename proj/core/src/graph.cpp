#include "coarsenkit/graph.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace coarsenkit {

namespace {

std::string dims(const SpMat& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

std::vector<int> LoadingMatrix::assignment() const {
  validate_binary_loading(*this);
  std::vector<int> out(static_cast<std::size_t>(p()), -1);
  for (int i = 0; i < p(); ++i) {
    for (int j = 0; j < k(); ++j) {
      if (entries(i, j) != 0.0) {
        out[static_cast<std::size_t>(i)] = j;
        break;
      }
    }
  }
  return out;
}

std::vector<int> LoadingMatrix::group_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(k()), 0);
  for (int g : assignment()) ++sizes[static_cast<std::size_t>(g)];
  return sizes;
}

void validate_laplacian_structure(const SpMat& theta) {
  if (theta.rows() != theta.cols()) {
    throw DimensionError("Laplacian must be square, got " + dims(theta));
  }
  const auto p = theta.rows();
  SpMat diff = SpMat(theta.transpose()) - theta;
  for (int col = 0; col < diff.outerSize(); ++col) {
    for (SpMat::InnerIterator it(diff, col); it; ++it) {
      if (it.value() != 0.0) {
        throw ValidationError("Laplacian is not symmetric as stored at (" +
                              std::to_string(it.row()) + "," + std::to_string(it.col()) + ")");
      }
    }
  }
  double max_diag = 0.0;
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(p);
  for (int col = 0; col < theta.outerSize(); ++col) {
    for (SpMat::InnerIterator it(theta, col); it; ++it) {
      if (it.row() == it.col()) {
        max_diag = std::max(max_diag, it.value());
      } else if (it.value() > 0.0) {
        throw ValidationError("positive off-diagonal Laplacian entry at (" +
                              std::to_string(it.row()) + "," + std::to_string(it.col()) + ")");
      }
      row_sum(it.row()) += it.value();
    }
  }
  const double tol = 1e-9 * std::max(max_diag, 1.0);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (std::abs(row_sum(i)) > tol) {
      throw ValidationError("Laplacian row " + std::to_string(i) + " sums to " +
                            std::to_string(row_sum(i)) + ", expected 0");
    }
  }
}

bool is_connected(const SpMat& theta) {
  const auto p = theta.rows();
  if (p == 0) return false;
  if (p == 1) return true;
  std::vector<char> seen(static_cast<std::size_t>(p), 0);
  std::queue<Eigen::Index> frontier;
  frontier.push(0);
  seen[0] = 1;
  Eigen::Index reached = 1;
  while (!frontier.empty()) {
    const Eigen::Index u = frontier.front();
    frontier.pop();
    for (SpMat::InnerIterator it(theta, static_cast<int>(u)); it; ++it) {
      const Eigen::Index v = it.row();
      if (v == u || it.value() == 0.0) continue;
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == p;
}

int count_near_zero_eigenvalues(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double lambda_max = std::max(ev.maxCoeff(), 0.0);
  const double tol = 1e-9 * std::max(lambda_max, 1e-300);
  int count = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < tol) ++count;
  }
  return count;
}

void validate_binary_loading(const LoadingMatrix& c) {
  const auto& m = c.entries;
  if (c.form != LoadingForm::Binary) {
    throw ValidationError("loading matrix is not in Binary form");
  }
  if (m.rows() == 0 || m.cols() == 0) {
    throw ValidationError("loading matrix is empty");
  }
  std::vector<int> column_count(static_cast<std::size_t>(m.cols()), 0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    int nonzeros = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (v == 0.0) continue;
      if (v != 1.0) {
        throw ValidationError("binary loading entry (" + std::to_string(i) + "," +
                              std::to_string(j) + ") is " + std::to_string(v) +
                              ", expected 0 or 1");
      }
      ++nonzeros;
      ++column_count[static_cast<std::size_t>(j)];
    }
    if (nonzeros != 1) {
      throw ValidationError("binary loading row " + std::to_string(i) + " has " +
                            std::to_string(nonzeros) + " nonzeros, expected 1");
    }
  }
  for (std::size_t j = 0; j < column_count.size(); ++j) {
    if (column_count[j] == 0) {
      throw ValidationError("binary loading column " + std::to_string(j) + " is empty");
    }
  }
}

GraphData make_graph_data(SpMat laplacian, std::optional<Eigen::MatrixXd> features,
                          std::string name, bool require_connected) {
  laplacian.makeCompressed();
  validate_laplacian_structure(laplacian);
  if (require_connected && !is_connected(laplacian)) {
    throw ValidationError("graph '" + name + "' is disconnected");
  }
  if (features && features->rows() != laplacian.rows()) {
    throw DimensionError("feature matrix has " + std::to_string(features->rows()) +
                         " rows for " + std::to_string(laplacian.rows()) + " nodes");
  }
  GraphData g;
  g.p = static_cast<int>(laplacian.rows());
  g.laplacian = std::move(laplacian);
  g.features = std::move(features);
  g.name = std::move(name);
  return g;
}

SpMat laplacian_from_weights(const SpMat& weights) {
  if (weights.rows() != weights.cols()) {
    throw DimensionError("weight matrix must be square, got " + dims(weights));
  }
  const auto p = weights.rows();
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(p);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(weights.nonZeros()) + static_cast<std::size_t>(p));
  for (int col = 0; col < weights.outerSize(); ++col) {
    for (SpMat::InnerIterator it(weights, col); it; ++it) {
      const double w = it.value();
      if (w == 0.0) continue;
      if (it.row() == it.col()) {
        throw ValidationError("weight matrix has nonzero diagonal at " +
                              std::to_string(it.row()));
      }
      if (w < 0.0) {
        throw ValidationError("negative weight at (" + std::to_string(it.row()) + "," +
                              std::to_string(it.col()) + ")");
      }
      if (std::abs(weights.coeff(it.col(), it.row()) - w) != 0.0) {
        throw ValidationError("weight matrix not symmetric at (" + std::to_string(it.row()) +
                              "," + std::to_string(it.col()) + ")");
      }
      triplets.emplace_back(it.row(), it.col(), -w);
      degree(it.row()) += w;
    }
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    if (degree(i) != 0.0) triplets.emplace_back(i, i, degree(i));
  }
  SpMat theta(p, p);
  theta.setFromTriplets(triplets.begin(), triplets.end());
  theta.makeCompressed();
  return theta;
}

SpMat laplacian_from_weights(const Eigen::MatrixXd& weights) {
  return laplacian_from_weights(SpMat(weights.sparseView()));
}

Eigen::MatrixXd coarsen_laplacian(const SpMat& theta, const LoadingMatrix& c) {
  validate_binary_loading(c);
  if (theta.rows() != c.entries.rows()) {
    throw DimensionError("Laplacian is " + dims(theta) + " but loading has " +
                         std::to_string(c.entries.rows()) + " rows");
  }
  const std::vector<int> group = c.assignment();
  const int k = c.k();
  // Aggregate cross-group edge weights once per undirected edge; mirroring the
  // accumulator keeps the result symmetric to the last bit.
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(k, k);
  for (int col = 0; col < theta.outerSize(); ++col) {
    for (SpMat::InnerIterator it(theta, col); it; ++it) {
      if (it.row() >= it.col()) continue;
      const int a = group[static_cast<std::size_t>(it.row())];
      const int b = group[static_cast<std::size_t>(it.col())];
      if (a == b) continue;
      weights(std::min(a, b), std::max(a, b)) += -it.value();
    }
  }
  Eigen::MatrixXd theta_c = Eigen::MatrixXd::Zero(k, k);
  for (int a = 0; a < k; ++a) {
    double degree = 0.0;
    for (int b = 0; b < k; ++b) {
      if (a == b) continue;
      const double w = weights(std::min(a, b), std::max(a, b));
      theta_c(a, b) = -w;
      degree += w;
    }
    theta_c(a, a) = degree;
  }
  return theta_c;
}

SpMat coarsening_matrix(const LoadingMatrix& c) {
  validate_binary_loading(c);
  const std::vector<int> group = c.assignment();
  const std::vector<int> sizes = c.group_sizes();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) {
    triplets.emplace_back(group[i], static_cast<int>(i),
                          1.0 / static_cast<double>(sizes[static_cast<std::size_t>(group[i])]));
  }
  SpMat pmat(c.k(), c.p());
  pmat.setFromTriplets(triplets.begin(), triplets.end());
  pmat.makeCompressed();
  return pmat;
}

Eigen::MatrixXd coarsen_features(const Eigen::MatrixXd& x, const LoadingMatrix& c) {
  if (x.rows() != c.entries.rows()) {
    throw DimensionError("feature matrix has " + std::to_string(x.rows()) + " rows but loading has " +
                         std::to_string(c.entries.rows()));
  }
  return coarsening_matrix(c) * x;
}

Eigen::MatrixXd lift_laplacian(const Eigen::MatrixXd& theta_c, const LoadingMatrix& c) {
  validate_binary_loading(c);
  if (theta_c.rows() != c.k() || theta_c.cols() != c.k()) {
    throw DimensionError("coarsened Laplacian is " + std::to_string(theta_c.rows()) + "x" +
                         std::to_string(theta_c.cols()) + " but loading has " +
                         std::to_string(c.k()) + " columns");
  }
  const std::vector<int> group = c.assignment();
  const std::vector<int> sizes = c.group_sizes();
  const int p = c.p();
  Eigen::MatrixXd lift(p, p);
  for (int i = 0; i < p; ++i) {
    const int gi = group[static_cast<std::size_t>(i)];
    const double di = static_cast<double>(sizes[static_cast<std::size_t>(gi)]);
    for (int j = 0; j < p; ++j) {
      const int gj = group[static_cast<std::size_t>(j)];
      lift(i, j) = theta_c(gi, gj) / (di * static_cast<double>(sizes[static_cast<std::size_t>(gj)]));
    }
  }
  return lift;
}

RoundResult round_loading(const Eigen::MatrixXd& c_relaxed) {
  const auto p = c_relaxed.rows();
  const auto k = c_relaxed.cols();
  if (p == 0 || k == 0) throw ArgumentError("cannot round an empty loading matrix");
  if ((c_relaxed.array() < 0.0).any()) {
    throw ArgumentError("relaxed loading matrix has negative entries");
  }
  std::vector<int> choice(static_cast<std::size_t>(p));
  std::vector<int> column_count(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < p; ++i) {
    Eigen::Index best = 0;
    double best_value = c_relaxed(i, 0);
    for (Eigen::Index j = 1; j < k; ++j) {
      if (c_relaxed(i, j) > best_value) {  // strict: ties keep the lowest index
        best_value = c_relaxed(i, j);
        best = j;
      }
    }
    if (best_value <= 0.0) {
      throw SolverError("row " + std::to_string(i) + " of the relaxed loading matrix is all zeros");
    }
    choice[static_cast<std::size_t>(i)] = static_cast<int>(best);
    ++column_count[static_cast<std::size_t>(best)];
  }

  // Drop empty supernodes, renumbering the survivors in order.
  std::vector<int> remap(static_cast<std::size_t>(k), -1);
  int kept = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (column_count[static_cast<std::size_t>(j)] > 0) remap[static_cast<std::size_t>(j)] = kept++;
  }

  LoadingMatrix out;
  out.form = LoadingForm::Binary;
  out.entries = Eigen::MatrixXd::Zero(p, kept);
  for (Eigen::Index i = 0; i < p; ++i) {
    out.entries(i, remap[static_cast<std::size_t>(choice[static_cast<std::size_t>(i)])]) = 1.0;
  }
  RoundResult result;
  result.loading = std::move(out);
  result.dropped_columns = static_cast<int>(k) - kept;
  result.kept_columns.reserve(static_cast<std::size_t>(kept));
  for (Eigen::Index j = 0; j < k; ++j) {
    if (remap[static_cast<std::size_t>(j)] >= 0) result.kept_columns.push_back(static_cast<int>(j));
  }
  return result;
}

}  // namespace coarsenkit
