// Serial reference vs OpenMP versions of the data-parallel kernels.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <numeric>

#include "linklda/estimate.hpp"
#include "linklda/kernels.hpp"
#include "linklda/sampler.hpp"
#include "linklda/synthetic.hpp"

using namespace linklda;

namespace {

struct Fixture {
  GeneratedCorpus generated;
  std::unique_ptr<ModelContext> ctx;
  TopicModel model;
  std::vector<DocId> docs;

  explicit Fixture(std::size_t doc_count) {
    TwoBlockOptions options;
    options.docs = doc_count;
    options.vocab = 2000;
    options.mean_length = 150.0;
    options.outlinks = 8;
    generated = generate_two_block_corpus(options);
    const Corpus& corpus = generated.corpus;
    ctx = std::make_unique<ModelContext>(corpus, Hyperparams::defaults(30, corpus.vocab_size()), ModelKind::linked);
    SamplerConfig config;
    config.model = ModelKind::linked;
    config.iterations = 2;
    model = estimate_model(*ctx, run_chain(*ctx, config).state.counts);
    docs.resize(corpus.doc_count());
    std::iota(docs.begin(), docs.end(), DocId{0});
  }
};

const Fixture& fixture(std::size_t docs) {
  static std::map<std::size_t, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[docs];
  if (!slot) slot = std::make_unique<Fixture>(docs);
  return *slot;
}

void BM_HeldoutSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::heldout_loglik_serial(f.model, f.generated.corpus, f.docs));
}

void BM_HeldoutParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::heldout_loglik_parallel(f.model, f.generated.corpus, f.docs));
}

void BM_CocitationSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::cocitation_serial(f.generated.corpus.links()));
}

void BM_CocitationParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::cocitation_parallel(f.generated.corpus.links()));
}

}  // namespace

BENCHMARK(BM_HeldoutSerial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HeldoutParallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CocitationSerial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CocitationParallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
