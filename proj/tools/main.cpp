#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "cli_app.hpp"
#include "coarsenkit/errors.hpp"

namespace {

using coarsenkit::StepRule;

StepRule parse_step_rule(const std::string& name) {
  if (name == "analytic") return StepRule::AnalyticBound;
  if (name == "backtrack") return StepRule::Backtracking;
  if (name == "inv-k") return StepRule::FixedInverseK;
  throw coarsenkit::ArgumentError("unknown step rule '" + name + "'");
}

void add_solver_flags(CLI::App* cmd, coarsenkit::SolverConfig* config, std::string* step) {
  cmd->add_option("--gamma", config->gamma, "log-det weight")->capture_default_str();
  cmd->add_option("--alpha", config->alpha, "feature-fidelity weight")->capture_default_str();
  cmd->add_option("--lambda", config->lambda, "row penalty weight")->capture_default_str();
  cmd->add_option("--outer", config->outer_iters, "outer iterations")->capture_default_str();
  cmd->add_option("--inner", config->inner_iters, "loading-matrix updates per outer iteration")
      ->capture_default_str();
  cmd->add_option("--tol", config->tol, "relative objective-change stop")->capture_default_str();
  cmd->add_option("--seed", config->seed, "random seed")->capture_default_str();
  cmd->add_option("--step", *step, "step rule: analytic | backtrack | inv-k")
      ->capture_default_str()
      ->check(CLI::IsMember({"analytic", "backtrack", "inv-k"}));
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("COARSENKIT_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) Eigen::setNbThreads(n);
  }

  CLI::App app{"graph coarsening toolkit"};
  app.require_subcommand(1);

  coarsenkit::cli::CoarsenArgs coarsen;
  std::string coarsen_step = "backtrack";
  double reduction_ratio = -1.0;
  auto* coarsen_cmd = app.add_subcommand("coarsen", "coarsen a graph and report metrics");
  coarsen_cmd->add_option("--algo", coarsen.algo, "fgc | gc | two-stage | fgcr")
      ->required()
      ->check(CLI::IsMember({"fgc", "gc", "two-stage", "fgcr"}));
  coarsen_cmd->add_option("--edges", coarsen.edges, "edge list file")->required();
  std::string coarsen_features;
  coarsen_cmd->add_option("--features", coarsen_features, "CSV feature file");
  coarsen_cmd->add_option("--ratio", coarsen.config.ratio, "coarsening ratio k/p")->required();
  coarsen_cmd->add_option("--reduction-ratio", reduction_ratio, "feature reduction ratio d/n");
  add_solver_flags(coarsen_cmd, &coarsen.config, &coarsen_step);
  coarsen_cmd->add_option("--out", coarsen.out_dir, "output directory")->required();

  coarsenkit::cli::GenerateArgs generate;
  auto* generate_cmd = app.add_subcommand("generate", "sample a synthetic dataset");
  generate_cmd->add_option("--model", generate.model, "er | ba | ws | rgg")
      ->required()
      ->check(CLI::IsMember({"er", "ba", "ws", "rgg"}));
  generate_cmd->add_option("--p", generate.p, "node count")->required();
  generate_cmd->add_option("--prob", generate.prob, "ER edge probability")->capture_default_str();
  generate_cmd->add_option("--mattach", generate.m_attach, "BA attachments per node")
      ->capture_default_str();
  generate_cmd->add_option("--kring", generate.k_ring, "WS ring degree")->capture_default_str();
  generate_cmd->add_option("--rewire", generate.rewire, "WS rewiring probability")
      ->capture_default_str();
  generate_cmd->add_option("--radius", generate.radius, "RGG connection radius")
      ->capture_default_str();
  generate_cmd->add_option("--wlo", generate.weight_lo, "minimum edge weight")
      ->capture_default_str();
  generate_cmd->add_option("--whi", generate.weight_hi, "maximum edge weight")
      ->capture_default_str();
  int gmrf_dim = -1;
  generate_cmd->add_option("--gmrf-dim", gmrf_dim, "sample this many smooth feature columns");
  double perturb = -1.0;
  generate_cmd->add_option("--perturb", perturb, "add round(rate*m) random edges");
  generate_cmd->add_option("--seed", generate.seed, "random seed")->capture_default_str();
  generate_cmd->add_option("--out", generate.out_dir, "output directory")->required();

  coarsenkit::cli::ClusterArgs cluster;
  std::string cluster_step = "backtrack";
  auto* cluster_cmd = app.add_subcommand("cluster", "group nodes via featured coarsening");
  cluster_cmd->add_option("--edges", cluster.edges, "edge list file")->required();
  std::string cluster_features;
  cluster_cmd->add_option("--features", cluster_features, "CSV feature file");
  std::string cluster_labels;
  cluster_cmd->add_option("--labels", cluster_labels, "ground-truth labels, one per line");
  cluster_cmd->add_option("--classes", cluster.classes, "number of groups")->required();
  int cluster_gmrf = -1;
  cluster_cmd->add_option("--gmrf-dim", cluster_gmrf,
                          "sample features of this dimension when none are given");
  add_solver_flags(cluster_cmd, &cluster.config, &cluster_step);
  cluster_cmd->add_option("--out", cluster.out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (coarsen_cmd->parsed()) {
      coarsen.config.step_rule = parse_step_rule(coarsen_step);
      if (!coarsen_features.empty()) coarsen.features = coarsen_features;
      if (reduction_ratio >= 0.0) coarsen.config.reduction_ratio = reduction_ratio;
      return coarsenkit::cli::run_coarsen(coarsen);
    }
    if (generate_cmd->parsed()) {
      if (gmrf_dim >= 0) generate.gmrf_dim = gmrf_dim;
      if (perturb >= 0.0) generate.perturb = perturb;
      return coarsenkit::cli::run_generate(generate);
    }
    if (cluster_cmd->parsed()) {
      cluster.config.step_rule = parse_step_rule(cluster_step);
      if (!cluster_features.empty()) cluster.features = cluster_features;
      if (!cluster_labels.empty()) cluster.labels = cluster_labels;
      if (cluster_gmrf >= 0) cluster.gmrf_dim = cluster_gmrf;
      coarsenkit::cli::run_cluster(cluster);
      return 0;
    }
  } catch (const coarsenkit::Error& e) {
    const nlohmann::json err = {{"error", {{"code", e.code()}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    const nlohmann::json err = {{"error", {{"code", "internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 2;
  }
  return 0;
}
