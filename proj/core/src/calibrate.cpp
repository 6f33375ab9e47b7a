#include "specdec/calibrate.hpp"

#include <thread>

#include "specdec/errors.hpp"

namespace specdec {

namespace {

// Counts rejection pairs from a standard-SD run of one prompt into `sink`.
void calibrate_prompt(const LanguageModel& draft, const LanguageModel& target,
                      const std::vector<TokenId>& prompt, const CalibrationOptions& opts,
                      std::uint64_t prompt_index, CorrectionMemory& sink) {
  GenerateOptions gen;
  gen.gamma = opts.gamma;
  gen.temperature = opts.temperature;
  gen.max_tokens = opts.max_tokens_per_prompt;

  RngStream rng(derive_seed(opts.base_seed, prompt_index));
  std::vector<TokenId> context = prompt;
  int generated = 0;
  while (generated < gen.max_tokens) {
    const DraftBatch batch = draft_propose(draft, context, gen.gamma, gen.temperature, rng);
    const TargetEval eval = target_evaluate(target, context, batch, gen.temperature);
    const VerifyOutcome outcome = sd_verify_round(batch, eval, gen.temperature, rng);
    for (const auto& e : outcome.rejection_events) {
      sink.update(e.draft_token, e.correction_token);
    }
    for (TokenId tok : outcome.emitted) {
      context.push_back(tok);
      if (++generated >= gen.max_tokens) break;
    }
  }
}

}  // namespace

void calibrate_incremental(CorrectionMemory& memory, const LanguageModel& draft,
                           const LanguageModel& target,
                           const std::vector<std::vector<TokenId>>& prompts,
                           const CalibrationOptions& opts) {
  const int workers = std::max(1, opts.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      calibrate_prompt(draft, target, prompts[i], opts, i, memory);
    }
    return;
  }

  // per-prompt seeds make the shard merge order-independent
  std::vector<CorrectionMemory> shards(static_cast<std::size_t>(workers),
                                       CorrectionMemory(memory.lambda()));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < prompts.size();
           i += static_cast<std::size_t>(workers)) {
        calibrate_prompt(draft, target, prompts[i], opts, i, shards[static_cast<std::size_t>(w)]);
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& shard : shards) memory.merge(shard);
}

CorrectionMemory calibrate(const LanguageModel& draft, const LanguageModel& target,
                           const std::vector<std::vector<TokenId>>& prompts,
                           const CalibrationOptions& opts, std::uint32_t lambda) {
  if (prompts.empty()) throw ParseError("calibration corpus is empty");
  CorrectionMemory memory(lambda);
  calibrate_incremental(memory, draft, target, prompts, opts);
  return memory;
}

}  // namespace specdec
