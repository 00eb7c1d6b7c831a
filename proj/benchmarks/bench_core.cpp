#include <benchmark/benchmark.h>

#include <map>
#include <tuple>

#include "gesturekit/classifier.hpp"
#include "gesturekit/evaluation.hpp"
#include "gesturekit/hmm.hpp"
#include "gesturekit/quantizer.hpp"
#include "gesturekit/synthetic.hpp"
#include "gesturekit/training.hpp"

using namespace gesturekit;

namespace {

struct Fixture {
  Dataset train, test;
  std::vector<GestureModel> models;
};

// Benchmark-regime gesture set, trained once per size.
const Fixture& fixture(std::size_t gestures) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(gestures);
  if (it != cache.end()) return it->second;
  BenchmarkSetSpec spec;
  spec.gestures = gestures;
  Fixture f;
  std::tie(f.train, f.test) = split(benchmark_dataset(spec, 1), 0.75, 1);
  TrainingConfig tc;
  tc.seed = 1;
  f.models = train_all(f.train, tc).models;
  return cache.emplace(gestures, std::move(f)).first->second;
}

void BM_ForwardLikelihood(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto init = make_topology(Topology::left_to_right(2), n, 18, 3);
  Rng rng(5);
  std::uniform_int_distribution<Symbol> sym(0, 17);
  SymbolSequence obs(60);
  for (auto& s : obs) s = sym(rng);
  LikelihoodEvaluator eval(init.hmm);
  for (auto _ : state) benchmark::DoNotOptimize(eval.log_likelihood(obs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(obs.size()));
}
BENCHMARK(BM_ForwardLikelihood)->Arg(4)->Arg(8)->Arg(16);

void BM_TraceDistributions(benchmark::State& state) {
  const auto& f = fixture(10);
  const auto kind = static_cast<QuantizerKind>(state.range(0));
  const auto& m = f.models[0];
  const auto& tr = f.test.traces()[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(trace_distributions(tr, *m.codebook, kind, &m.error_model));
  }
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_TraceDistributions)
    ->Arg(static_cast<int>(QuantizerKind::kStatisticalGmm))
    ->Arg(static_cast<int>(QuantizerKind::kStatisticalRandom));

void BM_Classify(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto kind = static_cast<QuantizerKind>(state.range(1));
  ClassifierConfig cfg;
  cfg.quantizer = kind;
  cfg.thr = 1.0 / double(f.models.size());
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& tr = f.test.traces()[i % f.test.size()];
    benchmark::DoNotOptimize(classify(tr, f.models, cfg, i));
    ++i;
  }
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_Classify)
    ->ArgsProduct({{10, 20},
                   {static_cast<int>(QuantizerKind::kDeterministicElliptical),
                    static_cast<int>(QuantizerKind::kStatisticalGmm)}})
    ->Unit(benchmark::kMillisecond);

void BM_TrainGestureSet(benchmark::State& state) {
  BenchmarkSetSpec spec;
  spec.gestures = static_cast<std::size_t>(state.range(0));
  const auto data = benchmark_dataset(spec, 2);
  TrainingConfig tc;
  for (auto _ : state) benchmark::DoNotOptimize(train_all(data, tc));
}
BENCHMARK(BM_TrainGestureSet)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

// The distro benchmark_main archive carries LTO bytecode from another compiler build.
BENCHMARK_MAIN();
