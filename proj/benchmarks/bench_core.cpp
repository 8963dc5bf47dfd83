#include <benchmark/benchmark.h>

#include "spbopt/gp.hpp"
#include "spbopt/partition.hpp"
#include "spbopt/rng.hpp"
#include "spbopt/sampling.hpp"
#include "spbopt/trust_region.hpp"

using namespace spbopt;

namespace {

Eigen::MatrixXd random_inputs(int n, int d, Rng& rng) {
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) X(i, j) = rng.uniform();
  }
  return X;
}

void BM_LatinHypercube(benchmark::State& state) {
  Rng rng(1);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(latin_hypercube(n, 8, rng));
  }
}
BENCHMARK(BM_LatinHypercube)->Arg(24)->Arg(128);

void BM_LhsRatio(benchmark::State& state) {
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lhs_ratio(24, 3, rng, 100));
  }
}
BENCHMARK(BM_LhsRatio);

void BM_FitGp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(2);
  const Eigen::MatrixXd X = random_inputs(n, 6, rng);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = std::sin(4.0 * X(i, 0)) + X(i, 1);
  for (auto _ : state) {
    Rng fit_rng(3);
    benchmark::DoNotOptimize(fit_gp(X, y, GpConfig{}, fit_rng));
  }
}
BENCHMARK(BM_FitGp)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ProposeBatch(benchmark::State& state) {
  const int n = 64, d = 6;
  Rng rng(4);
  const Eigen::MatrixXd X = random_inputs(n, d, rng);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = (X.row(i).array() - 0.4).square().sum();
  Rng fit_rng(5);
  const GpModel gp = fit_gp(X, y, GpConfig{}, fit_rng);
  const RegionMargin everything = [](const Eigen::VectorXd&) { return 1.0; };
  Eigen::VectorXd center = Eigen::VectorXd::Constant(d, 0.4);
  for (auto _ : state) {
    TrustRegion tr = init_trust_region(d, center);
    Rng prop(6);
    benchmark::DoNotOptimize(propose_batch(tr, gp, everything, 8, prop));
  }
}
BENCHMARK(BM_ProposeBatch)->Unit(benchmark::kMillisecond);

void BM_SmoFit(benchmark::State& state) {
  const int n = 128;
  Rng rng(7);
  Eigen::MatrixXd X = random_inputs(n, 6, rng);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = X.row(i).sum() + 0.3 * rng.normal();
  const std::vector<Side> labels = kmeans2_1d(y);
  SplitParams params;
  params.kernel = SvmKernel::kPoly;
  params.C = 745.322745;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_split_model(X, labels, params));
  }
}
BENCHMARK(BM_SmoFit)->Unit(benchmark::kMillisecond);

void BM_BuildPartition(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(8);
  Eigen::MatrixXd X = random_inputs(n, 4, rng);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = (X.row(i).array() - 0.3).square().sum() + 0.1 * rng.normal();
  }
  PartitionConfig config;
  config.split.kernel = SvmKernel::kRbf;
  config.split.C = 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_partition(X, y, config));
  }
}
BENCHMARK(BM_BuildPartition)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
