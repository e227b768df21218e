#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "muygps/kernel.hpp"
#include "muygps/muygps.hpp"
#include "muygps/nn_index.hpp"
#include "muygps/parallel.hpp"

using namespace muygps;

namespace {

FeatureMatrix uniform(Eigen::Index n, Eigen::Index d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FeatureMatrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = u(rng);
  return m;
}

Vector labels_of(const FeatureMatrix& x) {
  Vector z(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) z[i] = x(i, 0) + x(i, 1) > 1.0 ? 1.0 : -1.0;
  return z;
}

struct Fixture {
  std::shared_ptr<const NnIndex> index;
  Vector z;
  FeatureMatrix test;
};

const Fixture& fixture(Eigen::Index n, Eigen::Index d) {
  static std::map<std::pair<Eigen::Index, Eigen::Index>, Fixture> cache;
  auto [it, fresh] = cache.try_emplace({n, d});
  if (fresh) {
    FeatureMatrix x = uniform(n, d, 1);
    it->second.z = labels_of(x);
    it->second.index = std::make_shared<const NnIndex>(NnIndex::build(std::move(x)));
    it->second.test = uniform(256, d, 2);
  }
  return it->second;
}

}  // namespace

// Kriging cost per point with neighborhoods already found.
static void BM_KrigeGivenNeighbors(benchmark::State& state) {
  set_thread_count(1);
  const auto k = static_cast<std::size_t>(state.range(0));
  const Fixture& f = fixture(4000, 8);
  const auto nbrs = f.index->query_batch(f.test, k);
  const MuyGpsModel model(f.index, f.z, KernelParams{}, k);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(f.test, nbrs));
  state.SetItemsProcessed(state.iterations() * f.test.rows());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KrigeGivenNeighbors)->RangeMultiplier(2)->Range(8, 256)->Complexity();

// Full predict: exact search plus kriging.
static void BM_Predict(benchmark::State& state) {
  set_thread_count(1);
  const auto k = static_cast<std::size_t>(state.range(0));
  const Fixture& f = fixture(state.range(1), 80);
  const MuyGpsModel model(f.index, f.z, KernelParams{}, k);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(f.test));
  state.SetItemsProcessed(state.iterations() * f.test.rows());
}
BENCHMARK(BM_Predict)->ArgsProduct({{8, 35, 50}, {2000, 12000}});

static void BM_NnQuery(benchmark::State& state) {
  set_thread_count(1);
  const Fixture& f = fixture(state.range(0), 80);
  for (auto _ : state) benchmark::DoNotOptimize(f.index->query_batch(f.test, 50));
  state.SetItemsProcessed(state.iterations() * f.test.rows());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NnQuery)->RangeMultiplier(4)->Range(1000, 64000)->Complexity(benchmark::oN);

// One optimizer step: the loss over a cached batch at a new length scale.
static void BM_BatchLoss(benchmark::State& state) {
  set_thread_count(1);
  const Fixture& f = fixture(12000, 80);
  std::vector<std::size_t> batch(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i * 7;
  const BatchObjective objective(*f.index, f.z, batch, 50);
  KernelParams p;
  double l = 0.5;
  for (auto _ : state) {
    p.length_scale = l;
    l = l < 2.0 ? l * 1.01 : 0.5;
    benchmark::DoNotOptimize(objective(p));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchLoss)->Arg(100)->Arg(500);

static void BM_Covariance(benchmark::State& state) {
  const Eigen::Index k = state.range(0);
  const Matrix dist = pairwise_distances(uniform(k, 8, 3), uniform(k, 8, 3));
  const KernelParams p;
  for (auto _ : state) benchmark::DoNotOptimize(covariance_from_distances(dist, p));
  state.SetComplexityN(k);
}
BENCHMARK(BM_Covariance)->RangeMultiplier(2)->Range(8, 256)->Complexity(benchmark::oNSquared);

BENCHMARK_MAIN();
