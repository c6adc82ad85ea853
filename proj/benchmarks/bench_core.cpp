#include <benchmark/benchmark.h>

#include "coarsenkit/datagen.hpp"
#include "coarsenkit/graph.hpp"
#include "coarsenkit/metrics.hpp"
#include "coarsenkit/rng.hpp"
#include "coarsenkit/solver.hpp"

namespace {

using namespace coarsenkit;

GraphData bench_graph(int p) {
  return generate_graph(ErModel{p, 0.05}, WeightRange{1.0, 10.0}, 99);
}

void BM_CoarsenLaplacian(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const GraphData g = bench_graph(p);
  Rng rng(1);
  LoadingMatrix c;
  c.form = LoadingForm::Binary;
  c.entries = Eigen::MatrixXd::Zero(p, p / 4);
  for (int i = 0; i < p; ++i) {
    c.entries(i, i < p / 4 ? i : static_cast<int>(rng.integer(p / 4))) = 1.0;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(coarsen_laplacian(g.laplacian, c));
  }
}
BENCHMARK(BM_CoarsenLaplacian)->Arg(256)->Arg(1024);

void BM_ProjectRows(benchmark::State& state) {
  Rng rng(2);
  const int p = static_cast<int>(state.range(0));
  Eigen::MatrixXd a(p, p / 4);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-1.0, 1.0);
  std::vector<Eigen::Index> zeros;
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_nonneg_rowscaled(a, &zeros));
    zeros.clear();
  }
}
BENCHMARK(BM_ProjectRows)->Arg(512)->Arg(2048);

void BM_GradCFgc(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const GraphData g = bench_graph(p);
  const Eigen::MatrixXd x = sample_gmrf_features(g.laplacian, 32, 5);
  const int k = p / 4;
  FgcProblem prob{&g.laplacian, &x, 10.0, 5.0, 5.0, k};
  Rng rng(3);
  Eigen::MatrixXd c(p, k);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform();
  c = project_nonneg_rowscaled(c);
  const Eigen::MatrixXd xt = fgc_xtilde_closed_form(prob, c);
  const FgcCache cache = make_fgc_cache(prob, xt);
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad_c_fgc(prob, c, xt, &cache));
  }
}
BENCHMARK(BM_GradCFgc)->Arg(256)->Arg(512);

void BM_Spectrum(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const GraphData g = bench_graph(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectrum(g.laplacian, std::min(100, p)));
  }
}
BENCHMARK(BM_Spectrum)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
