#include "coarsenkit/io.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace coarsenkit {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

GraphData load_graph(const std::string& edge_path,
                     const std::optional<std::string>& feature_path, std::string name,
                     bool require_connected) {
  std::ifstream in(edge_path);
  if (!in) throw IoError("cannot open edge file '" + edge_path + "'");

  std::map<std::pair<int, int>, double> edges;  // (i<j) -> max weight
  int max_node = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = strip_comment(line);
    if (blank(body)) continue;
    std::istringstream fields(body);
    long long src = 0, dst = 0;
    double weight = 0.0;
    if (!(fields >> src >> dst >> weight)) {
      throw IoError(edge_path + ":" + std::to_string(line_no) +
                    ": expected 'src dst weight'");
    }
    std::string trailing;
    if (fields >> trailing) {
      throw IoError(edge_path + ":" + std::to_string(line_no) + ": trailing token '" +
                    trailing + "'");
    }
    if (src < 0 || dst < 0) {
      throw IoError(edge_path + ":" + std::to_string(line_no) + ": negative node index");
    }
    if (src == dst) {
      throw IoError(edge_path + ":" + std::to_string(line_no) + ": self-loop on node " +
                    std::to_string(src));
    }
    if (!(weight > 0.0)) {
      throw IoError(edge_path + ":" + std::to_string(line_no) + ": weight must be positive");
    }
    const int i = static_cast<int>(std::min(src, dst));
    const int j = static_cast<int>(std::max(src, dst));
    max_node = std::max(max_node, j);
    auto [it, inserted] = edges.try_emplace({i, j}, weight);
    if (!inserted) it->second = std::max(it->second, weight);
  }
  if (edges.empty()) throw IoError(edge_path + ": no edges found");

  const int p = max_node + 1;
  std::vector<char> present(static_cast<std::size_t>(p), 0);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 2);
  for (const auto& [key, w] : edges) {
    present[static_cast<std::size_t>(key.first)] = 1;
    present[static_cast<std::size_t>(key.second)] = 1;
    triplets.emplace_back(key.first, key.second, w);
    triplets.emplace_back(key.second, key.first, w);
  }
  for (int i = 0; i < p; ++i) {
    if (!present[static_cast<std::size_t>(i)]) {
      throw IoError(edge_path + ": node index gap, node " + std::to_string(i) +
                    " never appears");
    }
  }
  SpMat weights(p, p);
  weights.setFromTriplets(triplets.begin(), triplets.end());

  std::optional<Eigen::MatrixXd> features;
  if (feature_path) {
    Eigen::MatrixXd x = load_features_csv(*feature_path);
    if (x.rows() != p) {
      throw IoError(*feature_path + ": " + std::to_string(x.rows()) + " feature rows for " +
                    std::to_string(p) + " nodes");
    }
    features = std::move(x);
  }
  if (name.empty()) name = std::filesystem::path(edge_path).stem().string();
  return make_graph_data(laplacian_from_weights(weights), std::move(features), std::move(name),
                         require_connected);
}

void write_graph(const GraphData& graph, const std::string& edge_path) {
  auto out = open_out(edge_path);
  const SpMat& theta = graph.laplacian;
  for (int col = 0; col < theta.outerSize(); ++col) {
    for (SpMat::InnerIterator it(theta, col); it; ++it) {
      if (it.row() < it.col() && it.value() != 0.0) {
        out << it.row() << ' ' << it.col() << ' ' << format_double(-it.value()) << '\n';
      }
    }
  }
}

Eigen::MatrixXd load_features_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = strip_comment(line);
    if (blank(body)) continue;
    std::vector<double> row;
    std::istringstream fields(body);
    std::string cell;
    while (std::getline(fields, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": ragged row, " +
                    std::to_string(row.size()) + " cells vs " +
                    std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": no feature rows");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return x;
}

void write_features_csv(const Eigen::MatrixXd& features, const std::string& path) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(features(i, j));
    }
    out << '\n';
  }
}

std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file '" + path + "'");
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = strip_comment(line);
    if (blank(body)) continue;
    try {
      labels.push_back(std::stoi(body));
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(line_no) + ": bad label '" + body + "'");
    }
  }
  if (labels.empty()) throw IoError(path + ": no labels found");
  return labels;
}

namespace {

const char* step_rule_name(StepRule rule) {
  switch (rule) {
    case StepRule::AnalyticBound: return "analytic";
    case StepRule::Backtracking: return "backtrack";
    case StepRule::FixedInverseK: return "inv-k";
  }
  return "?";
}

}  // namespace

void write_report(const ReportBundle& bundle, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
  const std::filesystem::path dir(out_dir);

  json config = {
      {"gamma", bundle.config.gamma},
      {"alpha", bundle.config.alpha},
      {"lambda", bundle.config.lambda},
      {"ratio", bundle.config.ratio},
      {"outer_iters", bundle.config.outer_iters},
      {"inner_iters", bundle.config.inner_iters},
      {"step_rule", step_rule_name(bundle.config.step_rule)},
      {"tol", bundle.config.tol},
  };
  if (bundle.config.reduction_ratio) config["reduction_ratio"] = *bundle.config.reduction_ratio;

  const json doc = {
      {"algo", bundle.algo},
      {"dataset", bundle.dataset},
      {"p", bundle.p},
      {"k", bundle.k},
      {"seed", bundle.config.seed},
      {"config", config},
      {"ree", bundle.metrics.ree},
      {"de_original", bundle.metrics.de_original},
      {"de_coarsened", bundle.metrics.de_coarsened},
      {"he", bundle.metrics.he},
      {"re", bundle.metrics.re},
      {"log_re", bundle.log_re},
      {"epsilon", bundle.metrics.epsilon},
      {"m_used", bundle.metrics.m_used},
  };
  open_out((dir / "metrics.json").string()) << doc.dump(2) << '\n';

  {
    auto out = open_out((dir / "spectrum_original.csv").string());
    out << "index,eigenvalue_original\n";
    for (std::size_t i = 0; i < bundle.spectrum_original.size(); ++i) {
      out << i << ',' << format_double(bundle.spectrum_original[i]) << '\n';
    }
  }
  {
    auto out = open_out((dir / "spectrum_coarse.csv").string());
    out << "index,eigenvalue_coarse\n";
    for (std::size_t i = 0; i < bundle.spectrum_coarse.size(); ++i) {
      out << i << ',' << format_double(bundle.spectrum_coarse[i]) << '\n';
    }
  }
  {
    auto out = open_out((dir / "loss.csv").string());
    out << "iter,objective\n";
    for (std::size_t i = 0; i < bundle.loss.size(); ++i) {
      out << i << ',' << format_double(bundle.loss[i]) << '\n';
    }
  }
  {
    auto out = open_out((dir / "ctc_heatmap.csv").string());
    for (Eigen::Index i = 0; i < bundle.ctc.rows(); ++i) {
      for (Eigen::Index j = 0; j < bundle.ctc.cols(); ++j) {
        if (j > 0) out << ',';
        out << format_double(bundle.ctc(i, j));
      }
      out << '\n';
    }
  }
  {
    auto out = open_out((dir / "assignment.csv").string());
    out << "node,supernode\n";
    for (std::size_t i = 0; i < bundle.assignment.size(); ++i) {
      out << i << ',' << bundle.assignment[i] << '\n';
    }
  }
}

MetricsFile load_metrics_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  MetricsFile out;
  out.metrics.ree = doc.at("ree").get<double>();
  out.metrics.de_original = doc.at("de_original").get<double>();
  out.metrics.de_coarsened = doc.at("de_coarsened").get<double>();
  out.metrics.he = doc.at("he").get<double>();
  out.metrics.re = doc.at("re").get<double>();
  out.metrics.epsilon = doc.at("epsilon").get<double>();
  out.metrics.m_used = doc.at("m_used").get<int>();
  out.log_re = doc.at("log_re").get<double>();
  out.seed = doc.at("seed").get<std::uint64_t>();
  out.algo = doc.at("algo").get<std::string>();
  return out;
}

}  // namespace coarsenkit
