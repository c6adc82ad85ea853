#include "cli_app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "coarsenkit/datagen.hpp"
#include "coarsenkit/fgc.hpp"
#include "coarsenkit/fgcr.hpp"
#include "coarsenkit/gc.hpp"
#include "coarsenkit/io.hpp"
#include "coarsenkit/metrics.hpp"

namespace coarsenkit::cli {

namespace {

constexpr int kSpectrumPlotSize = 100;

ReportBundle make_bundle(const std::string& algo, const GraphData& graph,
                         const CoarsenedGraph& coarse, const SolverTrace& trace,
                         const SolverConfig& config) {
  ReportBundle bundle;
  bundle.algo = algo;
  bundle.dataset = graph.name;
  bundle.config = config;
  bundle.p = graph.p;
  bundle.k = coarse.k;
  bundle.wall_time = trace.wall_time;
  bundle.loss = trace.objective;

  bundle.spectrum_original = spectrum(graph.laplacian, std::min(kSpectrumPlotSize, graph.p));
  bundle.spectrum_coarse = spectrum(coarse.laplacian_c, std::min(kSpectrumPlotSize, coarse.k));

  const int m_requested = std::min(kSpectrumPlotSize, coarse.k - 1);
  bundle.metrics =
      compute_metric_report(graph, coarse, m_requested, &bundle.spectrum_original,
                            &bundle.spectrum_coarse);
  bundle.log_re = bundle.metrics.re > 0.0 ? std::log(bundle.metrics.re)
                                          : -std::numeric_limits<double>::infinity();

  bundle.ctc = coarse.loading.entries.transpose() * coarse.loading.entries;
  bundle.assignment = coarse.loading.assignment();
  return bundle;
}

}  // namespace

int run_coarsen(const CoarsenArgs& args) {
  const bool needs_features = args.algo == "fgc" || args.algo == "two-stage" ||
                              args.algo == "fgcr";
  GraphData graph = load_graph(args.edges, args.features);
  if (needs_features && !graph.has_features()) {
    throw ArgumentError("--algo " + args.algo + " requires --features");
  }
  if (args.algo == "gc" && graph.has_features()) {
    std::cerr << "warning: featureless solver ignores --features during optimization; "
                 "they still enter the metrics\n";
  }

  ReportBundle bundle;
  if (args.algo == "fgc") {
    FgcResult result = fgc_solve(graph, args.config);
    bundle = make_bundle(args.algo, graph, result.coarsened, result.trace, args.config);
  } else if (args.algo == "gc") {
    GcResult result = gc_solve(graph, args.config);
    bundle = make_bundle(args.algo, graph, result.coarsened, result.trace, args.config);
  } else if (args.algo == "two-stage") {
    GcResult result = two_stage_solve(graph, args.config);
    bundle = make_bundle(args.algo, graph, result.coarsened, result.trace, args.config);
  } else if (args.algo == "fgcr") {
    FgcrResult result = fgcr_solve(graph, args.config);
    bundle = make_bundle(args.algo, graph, result.coarsened, result.trace, args.config);
  } else {
    throw ArgumentError("unknown algorithm '" + args.algo + "'");
  }

  write_report(bundle, args.out_dir);
  return 0;
}

int run_generate(const GenerateArgs& args) {
  GraphModel model;
  if (args.model == "er") {
    model = ErModel{args.p, args.prob};
  } else if (args.model == "ba") {
    model = BaModel{args.p, args.m_attach};
  } else if (args.model == "ws") {
    model = WsModel{args.p, args.k_ring, args.rewire};
  } else if (args.model == "rgg") {
    model = RggModel{args.p, args.radius};
  } else {
    throw ArgumentError("unknown model '" + args.model + "'");
  }

  GraphData graph = generate_graph(model, WeightRange{args.weight_lo, args.weight_hi}, args.seed);

  std::optional<Eigen::MatrixXd> features;
  if (args.gmrf_dim) {
    features = sample_gmrf_features(graph.laplacian, *args.gmrf_dim, args.seed + 1);
  }
  if (args.perturb) {
    graph = perturb_edges(graph, *args.perturb, args.seed + 2);
  }

  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + args.out_dir + "'");
  const std::filesystem::path dir(args.out_dir);
  write_graph(graph, (dir / "edges.txt").string());
  if (features) write_features_csv(*features, (dir / "features.csv").string());

  std::cout << "wrote " << (dir / "edges.txt").string() << " (p=" << graph.p << ")";
  if (features) std::cout << " and features.csv (n=" << features->cols() << ")";
  std::cout << '\n';
  return 0;
}

namespace {

int best_permutation_mismatch(const std::vector<int>& assignment, const std::vector<int>& labels,
                              int classes) {
  std::vector<int> perm(static_cast<std::size_t>(classes));
  for (int i = 0; i < classes; ++i) perm[static_cast<std::size_t>(i)] = i;
  int best = static_cast<int>(labels.size()) + 1;
  do {
    int mismatch = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (perm[static_cast<std::size_t>(assignment[i])] != labels[i]) ++mismatch;
    }
    best = std::min(best, mismatch);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

std::vector<int> cluster_assignments(const GraphData& graph, const SolverConfig& config,
                                     int classes, int restarts) {
  const FgcProblem prob{&graph.laplacian, &*graph.features, config.gamma, config.alpha,
                        config.lambda, classes};
  double best_objective = std::numeric_limits<double>::infinity();
  std::vector<int> best_assignment;
  std::string last_error = "no restart produced the requested group count";
  for (int restart = 0; restart < std::max(restarts, 1); ++restart) {
    SolverConfig attempt = config;
    attempt.seed = config.seed * 100 + static_cast<std::uint64_t>(restart);
    try {
      const FgcResult result = fgc_solve(graph, attempt, classes);
      if (result.coarsened.k != classes) continue;
      // score the feasible (rounded) configuration
      const double objective =
          objective_fgc(prob, result.coarsened.loading.entries, *result.coarsened.features_c);
      if (objective < best_objective) {
        best_objective = objective;
        best_assignment = result.coarsened.loading.assignment();
      }
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (best_assignment.empty()) {
    throw SolverError("grouping failed across restarts: " + last_error);
  }
  return best_assignment;
}

ClusterOutcome run_cluster(const ClusterArgs& args) {
  GraphData graph = load_graph(args.edges, args.features);
  if (args.classes < 1) throw ArgumentError("--classes must be at least 1");
  if (args.classes >= graph.p) {
    throw ArgumentError("--classes must be smaller than the node count");
  }
  if (!graph.has_features()) {
    if (!args.gmrf_dim) {
      throw ArgumentError("graph has no features; pass --features or --gmrf-dim");
    }
    graph.features = sample_gmrf_features(graph.laplacian, *args.gmrf_dim, args.config.seed);
  }

  ClusterOutcome outcome;
  if (args.classes == 1) {
    outcome.assignment.assign(static_cast<std::size_t>(graph.p), 0);
  } else {
    outcome.assignment = cluster_assignments(graph, args.config, args.classes);
  }

  if (args.labels) {
    const std::vector<int> labels = load_labels(*args.labels);
    if (labels.size() != outcome.assignment.size()) {
      throw IoError("label count " + std::to_string(labels.size()) + " does not match p = " +
                    std::to_string(outcome.assignment.size()));
    }
    for (int label : labels) {
      if (label < 0 || label >= args.classes) {
        throw IoError("label " + std::to_string(label) + " outside [0, classes)");
      }
    }
    if (args.classes > 6) {
      throw ArgumentError("exact permutation matching supports at most 6 classes");
    }
    outcome.misclassified =
        best_permutation_mismatch(outcome.assignment, labels, std::max(args.classes, 1));
  }

  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + args.out_dir + "'");
  const std::filesystem::path dir(args.out_dir);
  {
    std::ofstream out(dir / "assignment.csv");
    if (!out) throw IoError("cannot write assignment.csv");
    out << "node,supernode\n";
    for (std::size_t i = 0; i < outcome.assignment.size(); ++i) {
      out << i << ',' << outcome.assignment[i] << '\n';
    }
  }
  {
    nlohmann::json doc = {
        {"classes", args.classes},
        {"p", graph.p},
        {"seed", args.config.seed},
    };
    if (outcome.misclassified >= 0) doc["misclassified"] = outcome.misclassified;
    std::ofstream out(dir / "cluster.json");
    if (!out) throw IoError("cannot write cluster.json");
    out << doc.dump(2) << '\n';
  }
  if (outcome.misclassified >= 0) {
    std::cout << "misclassified " << outcome.misclassified << " of "
              << outcome.assignment.size() << " nodes\n";
  }
  return outcome;
}

}  // namespace coarsenkit::cli
