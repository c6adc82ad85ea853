#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "coarsenkit/io.hpp"
#include "support.hpp"

using namespace coarsenkit;
using namespace coarsenkit::testing;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("coarsenkit_io_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static int& counter() {
    static int value = 0;
    return value;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

}  // namespace

TEST_CASE("edge list loading") {
  TempDir dir;
  SUBCASE("worked 5-node example with comments") {
    write_text(dir.file("toy.edges"),
               "# toy graph\n"
               "0 3 1\n"
               "0 1 2\n"
               "0 2 3\n"
               "1 2 4\n"
               "2 4 5\n");
    const GraphData g = load_graph(dir.file("toy.edges"));
    CHECK(g.p == 5);
    CHECK((Eigen::MatrixXd(g.laplacian) - Eigen::MatrixXd(toy_laplacian())).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(g.name == "toy");
  }
  SUBCASE("reversed duplicates merge by max weight") {
    write_text(dir.file("dup.edges"), "1 0 2\n0 1 2\n0 1 7\n1 2 1\n");
    const GraphData g = load_graph(dir.file("dup.edges"));
    CHECK(g.laplacian.coeff(0, 1) == -7.0);
    CHECK(g.p == 3);
  }
  SUBCASE("parse errors carry line numbers") {
    write_text(dir.file("bad.edges"), "0 1 1\nnot numbers\n");
    CHECK_THROWS_WITH_AS(load_graph(dir.file("bad.edges")),
                         doctest::Contains("bad.edges:2"), IoError);
  }
  SUBCASE("node index gaps rejected") {
    write_text(dir.file("gap.edges"), "0 1 1\n3 1 1\n");  // node 2 never appears
    CHECK_THROWS_WITH_AS(load_graph(dir.file("gap.edges")), doctest::Contains("gap"), IoError);
  }
  SUBCASE("self-loops rejected") {
    write_text(dir.file("loop.edges"), "0 0 1\n0 1 1\n");
    CHECK_THROWS_AS(load_graph(dir.file("loop.edges")), IoError);
  }
  SUBCASE("nonpositive weight rejected") {
    write_text(dir.file("neg.edges"), "0 1 -2\n");
    CHECK_THROWS_AS(load_graph(dir.file("neg.edges")), IoError);
  }
  SUBCASE("feature row-count mismatch rejected") {
    write_text(dir.file("g.edges"), "0 1 1\n1 2 1\n");
    write_text(dir.file("g.csv"), "1,2\n3,4\n");
    CHECK_THROWS_AS(load_graph(dir.file("g.edges"), dir.file("g.csv")), IoError);
  }
  SUBCASE("feature file attaches when rows match") {
    write_text(dir.file("g.edges"), "0 1 1\n1 2 1\n");
    write_text(dir.file("g.csv"), "1,2\n3,4\n5,6\n");
    const GraphData g = load_graph(dir.file("g.edges"), dir.file("g.csv"));
    REQUIRE(g.has_features());
    CHECK((*g.features)(2, 1) == 6.0);
  }
  SUBCASE("disconnected edge file reports an error") {
    write_text(dir.file("split.edges"), "0 1 1\n2 3 1\n");
    CHECK_THROWS_WITH_AS(load_graph(dir.file("split.edges")),
                         doctest::Contains("disconnected"), ValidationError);
  }
}

TEST_CASE("graph writing round-trips the edge multiset") {
  TempDir dir;
  Rng rng(5);
  const GraphData g = random_connected_graph(20, 0.2, 0.5, 9.5, rng);
  write_graph(g, dir.file("out.edges"));
  const GraphData back = load_graph(dir.file("out.edges"));
  CHECK((Eigen::MatrixXd(back.laplacian) - Eigen::MatrixXd(g.laplacian)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("feature csv round-trip keeps full precision") {
  TempDir dir;
  Rng rng(6);
  Eigen::MatrixXd x(7, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal() * 1e-3;
  write_features_csv(x, dir.file("x.csv"));
  const Eigen::MatrixXd back = load_features_csv(dir.file("x.csv"));
  CHECK((back - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("label loading") {
  TempDir dir;
  write_text(dir.file("labels.txt"), "# two groups\n0\n1\n1\n0\n");
  const std::vector<int> labels = load_labels(dir.file("labels.txt"));
  CHECK(labels == std::vector<int>{0, 1, 1, 0});
}

TEST_CASE("report file set") {
  TempDir dir;
  ReportBundle bundle;
  bundle.algo = "fgc";
  bundle.dataset = "toy";
  bundle.p = 5;
  bundle.k = 3;
  bundle.config.seed = 42;
  bundle.metrics.ree = 0.123456789012345;
  bundle.metrics.de_original = 31.4;
  bundle.metrics.de_coarsened = 12.1;
  bundle.metrics.he = 0.5;
  bundle.metrics.re = 7.25;
  bundle.metrics.epsilon = 0.25;
  bundle.metrics.m_used = 2;
  bundle.log_re = std::log(7.25);
  bundle.spectrum_original = {4.0, 2.0, 0.0};
  bundle.spectrum_coarse = {4.0, 2.0, 0.0};
  bundle.loss = {10.0, 8.0, 7.5};
  bundle.ctc = Eigen::MatrixXd::Identity(3, 3) * 2.0;
  bundle.assignment = {0, 0, 1, 1, 2};
  write_report(bundle, dir.file("run"));

  SUBCASE("all files exist") {
    for (const char* name : {"metrics.json", "spectrum_original.csv", "spectrum_coarse.csv",
                             "loss.csv", "ctc_heatmap.csv", "assignment.csv"}) {
      CHECK(std::filesystem::exists(dir.path / "run" / name));
    }
  }
  SUBCASE("metrics round-trip without loss") {
    const MetricsFile back = load_metrics_json((dir.path / "run" / "metrics.json").string());
    CHECK(back.metrics.ree == bundle.metrics.ree);
    CHECK(back.metrics.re == bundle.metrics.re);
    CHECK(back.metrics.epsilon == bundle.metrics.epsilon);
    CHECK(back.metrics.m_used == bundle.metrics.m_used);
    CHECK(back.log_re == bundle.log_re);
    CHECK(back.seed == 42);
    CHECK(back.algo == "fgc");
  }
  SUBCASE("identical spectra differ only in the header") {
    std::ifstream a(dir.path / "run" / "spectrum_original.csv");
    std::ifstream b(dir.path / "run" / "spectrum_coarse.csv");
    std::string line_a, line_b;
    std::getline(a, line_a);
    std::getline(b, line_b);
    CHECK(line_a != line_b);  // headers name the matrix
    while (std::getline(a, line_a) && std::getline(b, line_b)) {
      CHECK(line_a == line_b);
    }
  }
  SUBCASE("assignment has one row per node") {
    std::ifstream in(dir.path / "run" / "assignment.csv");
    std::string line;
    int rows = -1;  // header
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5);
  }
}
