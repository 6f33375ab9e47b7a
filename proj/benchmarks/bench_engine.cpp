#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <vector>

#include "specdec/calibrate.hpp"
#include "specdec/engine.hpp"
#include "specdec/generate.hpp"
#include "specdec/model.hpp"
#include "specdec/rng.hpp"

using namespace specdec;

namespace {

struct Fixture {
  std::shared_ptr<NGramModel> target;
  std::shared_ptr<PerturbedDraft> draft;
  CorrectionMemory memory{6};
  std::vector<TokenId> prompt{1, 2, 3};
};

Fixture make_fixture(std::size_t vocab) {
  Fixture fx;
  std::mt19937_64 gen(7);
  std::vector<std::vector<TokenId>> corpus;
  for (int d = 0; d < 50; ++d) {
    std::vector<TokenId> doc;
    TokenId cur = 1;
    for (int i = 0; i < 80; ++i) {
      doc.push_back(cur);
      cur = (gen() % 4 == 0) ? static_cast<TokenId>(1 + gen() % (vocab - 1))
                             : static_cast<TokenId>(1 + (cur * 13 + 5) % (vocab - 1));
    }
    corpus.push_back(doc);
  }
  fx.target = std::make_shared<NGramModel>(train_ngram(corpus, vocab, 3, 0.1));
  fx.draft = make_perturbed_draft(fx.target, {{2, 3}, {5, 6}}, 0.8, 0.0, 0);

  CalibrationOptions cal;
  std::vector<std::vector<TokenId>> prompts(corpus.begin(), corpus.begin() + 20);
  for (auto& p : prompts) p.resize(3);
  fx.memory = calibrate(*fx.draft, *fx.target, prompts, cal, 6);
  return fx;
}

void BM_VerifyRound(benchmark::State& state) {
  Fixture fx = make_fixture(static_cast<std::size_t>(state.range(0)));
  RngStream rng(1);
  const DraftBatch batch = draft_propose(*fx.draft, fx.prompt, 6, 0.8, rng);
  const TargetEval eval = target_evaluate(*fx.target, fx.prompt, batch, 0.8);
  for (auto _ : state) {
    CorrectionMemory memory = fx.memory;
    RngStream round_rng(2);
    benchmark::DoNotOptimize(
        csd_verify_round(batch, eval, 0.8, round_rng, CsdConfig::full(0.01), memory));
  }
}
BENCHMARK(BM_VerifyRound)->Arg(64)->Arg(256);

void BM_Generate(benchmark::State& state) {
  Fixture fx = make_fixture(128);
  GenerateOptions opts;
  opts.temperature = 0.8;
  opts.max_tokens = static_cast<int>(state.range(0));
  for (auto _ : state) {
    CorrectionMemory memory = fx.memory;
    RngStream rng(3);
    const GenerateResult result =
        generate(*fx.draft, *fx.target, fx.prompt, opts, CsdConfig::full(0.01), memory, rng);
    benchmark::DoNotOptimize(result);
    state.SetItemsProcessed(state.items_processed() +
                            static_cast<std::int64_t>(result.tokens.size()));
  }
}
BENCHMARK(BM_Generate)->Arg(64)->Arg(256);

void BM_VanillaGenerate(benchmark::State& state) {
  Fixture fx = make_fixture(128);
  GenerateOptions opts;
  opts.temperature = 0.8;
  opts.max_tokens = static_cast<int>(state.range(0));
  for (auto _ : state) {
    RngStream rng(3);
    const GenerateResult result = vanilla_generate(*fx.target, fx.prompt, opts, rng);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_VanillaGenerate)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
