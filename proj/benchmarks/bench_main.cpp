#include <benchmark/benchmark.h>

#include <random>

#include "occ/data.hpp"
#include "occ/metrics.hpp"
#include "occ/mlp.hpp"
#include "occ/objective.hpp"
#include "occ/trainer.hpp"

namespace {

occ::Matrix randomInputs(std::size_t rows, std::size_t cols) {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> d(-1, 1);
  occ::Matrix m(rows, cols);
  for (double& v : m.values()) v = d(g);
  return m;
}

void BM_Forward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto p = occ::makeTwoHiddenLayerMlp(8, 32, 8, occ::Activation{}, 1);
  const auto x = randomInputs(batch, 8);
  for (auto _ : state) benchmark::DoNotOptimize(occ::evaluate(p, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(64)->Arg(256)->Arg(1024);

void BM_ObjectiveGradient(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto p = occ::makeTwoHiddenLayerMlp(8, 32, 8, occ::Activation{}, 1);
  const auto x = randomInputs(batch, 8);
  const auto c = occ::columnMeans(occ::evaluate(p, x));
  occ::LossConfig cfg;
  cfg.kind = occ::LossKind::LblSig;
  for (auto _ : state) benchmark::DoNotOptimize(occ::evaluateObjective(p, x, c, 0.5, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ObjectiveGradient)->Arg(64)->Arg(256)->Arg(1024);

void BM_HrnGradient(benchmark::State& state) {
  const auto p = occ::makeTwoHiddenLayerMlp(8, 32, 1, occ::Activation{}, 1);
  const auto x = randomInputs(64, 8);
  occ::LossConfig cfg;
  cfg.kind = occ::LossKind::Hrn;
  const std::vector<double> none;
  for (auto _ : state) benchmark::DoNotOptimize(occ::evaluateObjective(p, x, none, 0.0, cfg));
}
BENCHMARK(BM_HrnGradient);

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> d(0, 1);
  std::vector<occ::ScoredSample> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = {d(g), i % 3 == 0 ? occ::SampleLabel::Outlier : occ::SampleLabel::Target};
  for (auto _ : state) benchmark::DoNotOptimize(occ::auc(s));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auc)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oNLogN);

void BM_TrainEpoch(benchmark::State& state) {
  const auto ds = occ::synthGaussianRing(42, 500, 500, 2, 5.0);
  const auto split = occ::normalize(occ::makeOccSplit(ds, 0, occ::FractionSplit{0.5, 42}));
  occ::TrainConfig cfg;
  cfg.loss.kind = occ::LossKind::Lbl;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(occ::train(split, cfg));
}
BENCHMARK(BM_TrainEpoch);

}  // namespace
BENCHMARK_MAIN();
