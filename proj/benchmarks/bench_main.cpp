#include <benchmark/benchmark.h>

#include <vector>

#include "jigsaw3d/downstream.hpp"
#include "jigsaw3d/jigsaw.hpp"
#include "jigsaw3d/loss.hpp"
#include "jigsaw3d/net.hpp"
#include "jigsaw3d/synth.hpp"

using namespace jigsaw3d;

namespace {

PointCloud random_unit_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = {rng.uniform(), rng.uniform(), rng.uniform()};
  return PointCloud(std::move(pts));
}

NetworkConfig bench_net() {
  NetworkConfig n;
  n.encoder_widths = {32, 64};
  n.embed_dim = 128;
  n.head_widths = {64};
  n.num_point_classes = 27;
  return n;
}

void BM_Voxelize(benchmark::State& state) {
  const PointCloud c = random_unit_cloud(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(voxelize(c, 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Voxelize)->Arg(256)->Arg(2048);

void BM_MakeJigsawSample(benchmark::State& state) {
  const PointCloud c = random_unit_cloud(static_cast<std::size_t>(state.range(0)), 2);
  const PointCloud donor = random_unit_cloud(static_cast<std::size_t>(state.range(0)), 3);
  Rng rng(4);
  const JigsawConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(make_jigsaw_sample(c, cfg, rng, &donor));
}
BENCHMARK(BM_MakeJigsawSample)->Arg(256)->Arg(2048);

void BM_Forward(benchmark::State& state) {
  Rng rng(5);
  const Parameters p = init_parameters(bench_net(), rng);
  const PointCloud c = random_unit_cloud(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(forward(p, c));
}
BENCHMARK(BM_Forward)->Arg(256)->Arg(1024);

void BM_ForwardBackward(benchmark::State& state) {
  Rng rng(7);
  const Parameters p = init_parameters(bench_net(), rng);
  const auto n = static_cast<std::size_t>(state.range(0));
  const PointCloud c = random_unit_cloud(n, 8);
  std::vector<int> targets(n);
  for (int& t : targets) t = static_cast<int>(rng.uniform_int(27));
  Parameters grads = p.zeros_like();
  for (auto _ : state) {
    const ForwardTrace tr = forward_trace(p, c, {}, true, false);
    const LossAndGrad lg = cross_entropy_per_point(tr.logits, targets);
    backward(p, tr, &lg.grad, {}, grads);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(256)->Arg(1024);

void BM_LinearSvm(benchmark::State& state) {
  Rng rng(9);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<double>> x(n, std::vector<double>(128));
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 4);
    for (double& v : x[i]) v = rng.gaussian() + 0.5 * y[i];
  }
  for (auto _ : state) {
    Rng r(10);
    benchmark::DoNotOptimize(fit_linear_svm(x, y, SvmOptions{}, r));
  }
}
BENCHMARK(BM_LinearSvm)->Arg(100)->Arg(1000);

void BM_SynthesizeDataset(benchmark::State& state) {
  SynthSpec s;
  s.per_class_count = 10;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_dataset(s));
}
BENCHMARK(BM_SynthesizeDataset);

}  // namespace
