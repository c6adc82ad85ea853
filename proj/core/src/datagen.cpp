#include "coarsenkit/datagen.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <vector>

#include "coarsenkit/rng.hpp"

namespace coarsenkit {

namespace {

struct EdgeList {
  int p = 0;
  std::vector<std::pair<int, int>> edges;  // i < j, unique
};

EdgeList sample_er(const ErModel& m, Rng& rng) {
  if (m.p < 2 || m.prob <= 0.0 || m.prob > 1.0) {
    throw ArgumentError("ER model needs p >= 2 and prob in (0, 1]");
  }
  EdgeList out;
  out.p = m.p;
  for (int i = 0; i < m.p; ++i) {
    for (int j = i + 1; j < m.p; ++j) {
      if (rng.uniform() < m.prob) out.edges.emplace_back(i, j);
    }
  }
  return out;
}

EdgeList sample_ba(const BaModel& m, Rng& rng) {
  if (m.p < 2 || m.m_attach < 1 || m.m_attach >= m.p) {
    throw ArgumentError("BA model needs p >= 2 and 1 <= m_attach < p");
  }
  EdgeList out;
  out.p = m.p;
  // Preferential attachment via the repeated-endpoints list; each new node
  // links to m distinct targets drawn degree-proportionally.
  std::vector<int> repeated;
  std::vector<int> targets(static_cast<std::size_t>(m.m_attach));
  for (int j = 0; j < m.m_attach; ++j) targets[static_cast<std::size_t>(j)] = j;
  for (int v = m.m_attach; v < m.p; ++v) {
    std::unordered_set<int> chosen;
    for (int t : targets) {
      if (!chosen.insert(t).second) continue;
      out.edges.emplace_back(std::min(v, t), std::max(v, t));
      repeated.push_back(t);
      repeated.push_back(v);
    }
    std::unordered_set<int> next;
    while (static_cast<int>(next.size()) < m.m_attach) {
      next.insert(repeated[rng.integer(repeated.size())]);
    }
    targets.assign(next.begin(), next.end());
    std::sort(targets.begin(), targets.end());
  }
  return out;
}

EdgeList sample_ws(const WsModel& m, Rng& rng) {
  if (m.p < 3 || m.k_ring < 2 || m.k_ring % 2 != 0 || m.k_ring >= m.p) {
    throw ArgumentError("WS model needs p >= 3 and even k_ring in [2, p)");
  }
  if (m.rewire_prob < 0.0 || m.rewire_prob > 1.0) {
    throw ArgumentError("WS rewire probability must lie in [0, 1]");
  }
  const int half = m.k_ring / 2;
  std::vector<std::unordered_set<int>> adj(static_cast<std::size_t>(m.p));
  auto connect = [&](int a, int b) {
    adj[static_cast<std::size_t>(a)].insert(b);
    adj[static_cast<std::size_t>(b)].insert(a);
  };
  auto connected = [&](int a, int b) {
    return adj[static_cast<std::size_t>(a)].count(b) > 0;
  };
  for (int u = 0; u < m.p; ++u) {
    for (int j = 1; j <= half; ++j) connect(u, (u + j) % m.p);
  }
  // Rewire the far endpoint of each ring edge with the given probability.
  for (int j = 1; j <= half; ++j) {
    for (int u = 0; u < m.p; ++u) {
      const int v = (u + j) % m.p;
      if (rng.uniform() >= m.rewire_prob) continue;
      if (static_cast<int>(adj[static_cast<std::size_t>(u)].size()) >= m.p - 1) continue;
      int w = static_cast<int>(rng.integer(static_cast<std::uint64_t>(m.p)));
      while (w == u || connected(u, w)) {
        w = static_cast<int>(rng.integer(static_cast<std::uint64_t>(m.p)));
      }
      adj[static_cast<std::size_t>(u)].erase(v);
      adj[static_cast<std::size_t>(v)].erase(u);
      connect(u, w);
    }
  }
  EdgeList out;
  out.p = m.p;
  for (int u = 0; u < m.p; ++u) {
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (u < v) out.edges.emplace_back(u, v);
    }
  }
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

EdgeList sample_rgg(const RggModel& m, Rng& rng) {
  if (m.p < 2 || m.radius <= 0.0) {
    throw ArgumentError("RGG model needs p >= 2 and radius > 0");
  }
  std::vector<std::pair<double, double>> points(static_cast<std::size_t>(m.p));
  for (auto& pt : points) {
    pt.first = rng.uniform();
    pt.second = rng.uniform();
  }
  EdgeList out;
  out.p = m.p;
  const double r_sq = m.radius * m.radius;
  for (int i = 0; i < m.p; ++i) {
    for (int j = i + 1; j < m.p; ++j) {
      const double dx = points[static_cast<std::size_t>(i)].first -
                        points[static_cast<std::size_t>(j)].first;
      const double dy = points[static_cast<std::size_t>(i)].second -
                        points[static_cast<std::size_t>(j)].second;
      if (dx * dx + dy * dy <= r_sq) out.edges.emplace_back(i, j);
    }
  }
  return out;
}

SpMat laplacian_from_edges(const EdgeList& list, WeightRange range, Rng& rng) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(list.edges.size() * 2);
  for (const auto& [i, j] : list.edges) {
    const double w = rng.uniform(range.lo, range.hi);
    triplets.emplace_back(i, j, w);
    triplets.emplace_back(j, i, w);
  }
  SpMat weights(list.p, list.p);
  weights.setFromTriplets(triplets.begin(), triplets.end());
  return laplacian_from_weights(weights);
}

}  // namespace

GraphData generate_graph(const GraphModel& model, WeightRange weights, std::uint64_t seed) {
  if (!(weights.lo > 0.0) || !(weights.hi >= weights.lo)) {
    throw ArgumentError("weight range must satisfy 0 < lo <= hi");
  }
  Rng rng(seed);
  constexpr int kMaxRetries = 100;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    EdgeList list = std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, ErModel>) return sample_er(m, rng);
          else if constexpr (std::is_same_v<T, BaModel>) return sample_ba(m, rng);
          else if constexpr (std::is_same_v<T, WsModel>) return sample_ws(m, rng);
          else return sample_rgg(m, rng);
        },
        model);
    SpMat theta = laplacian_from_edges(list, weights, rng);
    if (is_connected(theta)) {
      std::string name = std::visit(
          [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ErModel>) return std::string("er");
            else if constexpr (std::is_same_v<T, BaModel>) return std::string("ba");
            else if constexpr (std::is_same_v<T, WsModel>) return std::string("ws");
            else return std::string("rgg");
          },
          model);
      return make_graph_data(std::move(theta), std::nullopt, std::move(name));
    }
  }
  throw SolverError("could not sample a connected graph in 100 attempts; "
                    "parameters too sparse");
}

Eigen::MatrixXd sample_gmrf_features(const SpMat& theta, int n, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("feature dimension must be positive");
  if (!is_connected(theta)) {
    throw ValidationError("GMRF sampling needs a connected Laplacian "
                          "(pseudo-inverse is ambiguous across components)");
  }
  const int p = static_cast<int>(theta.rows());
  const Eigen::MatrixXd dense(theta);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double tol = 1e-9 * std::max(ev.maxCoeff(), 1e-300);

  Rng rng(seed);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(p, n);
  Eigen::VectorXd coeff(p);
  for (int col = 0; col < n; ++col) {
    for (int i = 0; i < p; ++i) {
      coeff(i) = ev(i) > tol ? rng.normal() / std::sqrt(ev(i)) : 0.0;
    }
    x.col(col) = es.eigenvectors() * coeff;
  }
  return x;
}

GraphData perturb_edges(const GraphData& graph, double perturbation_rate, std::uint64_t seed) {
  if (!(perturbation_rate > 0.0)) {
    throw ArgumentError("perturbation rate must be strictly positive");
  }
  const int p = graph.p;
  const SpMat& theta = graph.laplacian;

  std::unordered_set<std::int64_t> existing;
  std::int64_t m = 0;
  for (int col = 0; col < theta.outerSize(); ++col) {
    for (SpMat::InnerIterator it(theta, col); it; ++it) {
      if (it.row() < it.col() && it.value() != 0.0) {
        existing.insert(static_cast<std::int64_t>(it.row()) * p + it.col());
        ++m;
      }
    }
  }
  const std::int64_t total_pairs = static_cast<std::int64_t>(p) * (p - 1) / 2;
  const std::int64_t to_add = std::llround(perturbation_rate * static_cast<double>(m));
  if (m >= total_pairs) throw ArgumentError("graph is already complete; nothing to perturb");
  if (to_add > total_pairs - m) {
    throw ArgumentError("not enough absent node pairs for the requested perturbation");
  }
  if (to_add == 0) return graph;

  Rng rng(seed);
  std::unordered_set<std::int64_t> added;
  while (static_cast<std::int64_t>(added.size()) < to_add) {
    const int i = static_cast<int>(rng.integer(static_cast<std::uint64_t>(p)));
    const int j = static_cast<int>(rng.integer(static_cast<std::uint64_t>(p)));
    if (i == j) continue;
    const std::int64_t key = static_cast<std::int64_t>(std::min(i, j)) * p + std::max(i, j);
    if (existing.count(key) > 0) continue;
    added.insert(key);
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(theta.nonZeros()) + 4 * added.size());
  for (int col = 0; col < theta.outerSize(); ++col) {
    for (SpMat::InnerIterator it(theta, col); it; ++it) {
      triplets.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (std::int64_t key : added) {
    const int i = static_cast<int>(key / p);
    const int j = static_cast<int>(key % p);
    triplets.emplace_back(i, j, -1.0);
    triplets.emplace_back(j, i, -1.0);
    triplets.emplace_back(i, i, 1.0);
    triplets.emplace_back(j, j, 1.0);
  }
  SpMat perturbed(p, p);
  perturbed.setFromTriplets(triplets.begin(), triplets.end());
  return make_graph_data(std::move(perturbed), graph.features,
                         graph.name.empty() ? "perturbed" : graph.name + "_perturbed");
}

}  // namespace coarsenkit
