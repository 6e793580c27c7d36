#include <benchmark/benchmark.h>

#include "gapfair/classifier.hpp"
#include "gapfair/corpus.hpp"
#include "gapfair/debias.hpp"
#include "gapfair/features.hpp"
#include "gapfair/metrics.hpp"
#include "gapfair/rng.hpp"

using namespace gapfair;

namespace {

SyntheticConfig bench_corpus(std::int64_t n) {
  SyntheticConfig cfg;
  cfg.class_count = 8;
  cfg.group_count = 2;
  cfg.n = n;
  cfg.bias = 0.4;
  cfg.cell_rates = {9, 3, 9, 3, 9, 3, 9, 3, 3, 9, 3, 9, 3, 9, 3, 9};
  cfg.seed = 7;
  return cfg;
}

struct Prepared {
  Dataset data;
  FeatureMatrix x;
  std::vector<int> labels;
  std::vector<int> groups;
};

Prepared prepare(std::int64_t n) {
  Prepared p;
  p.data = generate_synthetic(bench_corpus(n));
  const Vocabulary vocab = fit_bow(p.data, 2, 0, true);
  p.x = transform(vocab, p.data);
  p.labels = p.data.labels();
  p.groups = p.data.groups();
  return p;
}

}  // namespace

static void BM_TfidfTransform(benchmark::State& state) {
  const Dataset data = generate_synthetic(bench_corpus(state.range(0)));
  const Vocabulary vocab = fit_bow(data, 2, 0, true);
  for (auto _ : state) {
    FeatureMatrix x = transform(vocab, data);
    benchmark::DoNotOptimize(x.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TfidfTransform)->Arg(2000)->Arg(10000);

static void BM_TrainEpochs(benchmark::State& state) {
  const Prepared p = prepare(4000);
  TrainConfig cfg;
  cfg.epochs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    LinearModel model = train(p.x, p.labels, cfg, p.data.class_count());
    benchmark::DoNotOptimize(model.weights.data());
  }
}
BENCHMARK(BM_TrainEpochs)->Arg(5)->Arg(20);

static void BM_Evaluate(benchmark::State& state) {
  const Prepared p = prepare(state.range(0));
  TrainConfig cfg;
  cfg.epochs = 5;
  const LinearModel model = train(p.x, p.labels, cfg, p.data.class_count());
  const std::vector<int> preds = predict(model, p.x);
  for (auto _ : state) {
    EvalResult r = evaluate(preds, p.labels, p.groups, p.data.class_names, p.data.group_names);
    benchmark::DoNotOptimize(r.accuracy);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evaluate)->Arg(10000);

static void BM_InlpFit(benchmark::State& state) {
  const Prepared p = prepare(3000);
  InlpParams params;
  params.guard.epochs = 10;
  params.max_iters = static_cast<int>(state.range(0));
  for (auto _ : state) {
    Projection proj = inlp_fit(p.x, p.groups, params);
    benchmark::DoNotOptimize(proj.matrix.data());
  }
}
BENCHMARK(BM_InlpFit)->Arg(2)->Arg(8);

BENCHMARK_MAIN();
