// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "wlac/kernels.hpp"
#include "wlac/model.hpp"
#include "wlac/rng.hpp"

using namespace wlac;

namespace {

std::vector<CollectedExample> make_batch(std::size_t n) {
  RandomSource r(1);
  std::vector<CollectedExample> batch;
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point x{r.uniform()};
    const auto y = static_cast<Label>(r.below(2)), wl = static_cast<Label>(r.below(2));
    const double u = r.uniform();
    if (u < 0.4) batch.push_back(CollectedExample::queried(x, y, wl, r.uniform(0.02, 1.0)));
    else if (u < 0.7) batch.push_back(CollectedExample::unqueried(x, wl));
    else batch.push_back(CollectedExample::out_of_region(x, y));
  }
  return batch;
}

std::vector<Point> make_points(std::size_t n, std::size_t dim) {
  RandomSource r(2);
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> f(dim);
    for (double& v : f) v = r.uniform(-2.0, 2.0);
    pts.emplace_back(std::move(f));
  }
  return pts;
}

template <void (*Kernel)(const HypothesisClass&, std::span<const CollectedExample>, kernels::LossSums&)>
void BM_AccumulateLosses(benchmark::State& state) {
  const ThresholdGrid g(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  const auto batch = make_batch(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    kernels::LossSums sums(g.size());
    Kernel(g, batch, sums);
    benchmark::DoNotOptimize(sums.dr.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

void BM_AccumulateLossesThreshold(benchmark::State& state) {
  const ThresholdGrid g(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  const auto batch = make_batch(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    kernels::LossSums sums(g.size());
    kernels::accumulate_losses_threshold(g, batch, sums);
    benchmark::DoNotOptimize(sums.dr.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

template <std::size_t (*Kernel)(const DisagreementRegion&, std::span<const Point>)>
void BM_CountInRegion(benchmark::State& state) {
  const auto g = std::make_shared<ThresholdGrid>(0.0, 1.0, 512);
  std::vector<HypothesisId> members;
  for (HypothesisId h = 200; h < 300; ++h) members.push_back(h);
  const DisagreementRegion d(g, ActiveSet{members, 250});
  RandomSource r(3);
  std::vector<Point> pool;
  for (std::int64_t i = 0; i < state.range(0); ++i) pool.push_back(Point{r.uniform()});
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(d, pool));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <std::vector<Label> (*Kernel)(const HypothesisClass&, std::span<const Point>)>
void BM_PredictionMatrix(benchmark::State& state) {
  const IntervalGrid g(0.0, 1.0, 40);
  RandomSource r(4);
  std::vector<Point> pts;
  for (std::int64_t i = 0; i < state.range(0); ++i) pts.push_back(Point{r.uniform()});
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(g, pts));
  state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(g.size()));
}

template <std::vector<double> (*Kernel)(const LinearSoftmaxModel&, std::span<const TrainTerm>)>
void BM_SoftmaxGradient(benchmark::State& state) {
  LinearSoftmaxModel m(3, 2);
  RandomSource r(5);
  for (double& w : m.weights()) w = r.uniform(-1.0, 1.0);
  const auto xs = make_points(static_cast<std::size_t>(state.range(0)), 2);
  std::vector<TrainTerm> terms;
  for (const auto& x : xs) terms.push_back(TrainTerm{&x, static_cast<Label>(r.below(3)), 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(m, terms));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_AccumulateLosses, kernels::accumulate_losses_serial)
    ->Name("accumulate_losses/serial")
    ->Args({512, 4096})
    ->Args({512, 32768});
BENCHMARK_TEMPLATE(BM_AccumulateLosses, kernels::accumulate_losses_parallel)
    ->Name("accumulate_losses/parallel")
    ->Args({512, 4096})
    ->Args({512, 32768});
BENCHMARK(BM_AccumulateLossesThreshold)->Name("accumulate_losses/threshold")->Args({512, 4096})->Args({512, 32768});

BENCHMARK_TEMPLATE(BM_CountInRegion, kernels::count_in_region_serial)->Name("count_in_region/serial")->Arg(100000);
BENCHMARK_TEMPLATE(BM_CountInRegion, kernels::count_in_region_parallel)->Name("count_in_region/parallel")->Arg(100000);

BENCHMARK_TEMPLATE(BM_PredictionMatrix, kernels::prediction_matrix_serial)->Name("prediction_matrix/serial")->Arg(4096);
BENCHMARK_TEMPLATE(BM_PredictionMatrix, kernels::prediction_matrix_parallel)
    ->Name("prediction_matrix/parallel")
    ->Arg(4096);

BENCHMARK_TEMPLATE(BM_SoftmaxGradient, kernels::softmax_gradient_serial)->Name("softmax_gradient/serial")->Arg(50000);
BENCHMARK_TEMPLATE(BM_SoftmaxGradient, kernels::softmax_gradient_parallel)->Name("softmax_gradient/parallel")->Arg(50000);

BENCHMARK_MAIN();
