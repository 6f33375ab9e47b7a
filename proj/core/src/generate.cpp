#include "specdec/generate.hpp"

#include <nlohmann/json.hpp>

#include "specdec/errors.hpp"

namespace specdec {

void EventLogWriter::write_round(int round_index, int gamma, const VerifyOutcome& outcome) {
  nlohmann::json rejections = nlohmann::json::array();
  for (const auto& e : outcome.rejection_events) {
    rejections.push_back({{"position", e.position},
                          {"draft_token", e.draft_token},
                          {"correction_token", e.correction_token},
                          {"p_draft_t1", e.p_draft_t1},
                          {"p_star_t1", e.p_star_t1},
                          {"rescued", e.rescued}});
  }
  nlohmann::json record = {
      {"round", round_index},
      {"gamma", gamma},
      {"accepted_len", outcome.accepted_len},
      {"rescued_positions", outcome.rescued_positions},
      {"rejections", std::move(rejections)},
      {"correction_token",
       outcome.correction ? nlohmann::json(*outcome.correction) : nlohmann::json(nullptr)},
      {"bonus_token", outcome.bonus ? nlohmann::json(*outcome.bonus) : nlohmann::json(nullptr)},
      {"emitted", outcome.emitted},
  };
  (*out_) << record.dump() << '\n';
}

GenerateResult generate(const LanguageModel& draft, const LanguageModel& target, TokenSpan prompt,
                        const GenerateOptions& opts, const CsdConfig& cfg, CorrectionMemory& memory,
                        RngStream& rng) {
  if (opts.max_tokens < 1) throw InvariantError("max_tokens must be >= 1");
  GenerateResult result;
  std::vector<TokenId> context(prompt.begin(), prompt.end());
  int round_index = 0;

  while (static_cast<int>(result.tokens.size()) < opts.max_tokens) {
    const DraftBatch batch = draft_propose(draft, context, opts.gamma, opts.temperature, rng);
    const TargetEval eval = target_evaluate(target, context, batch, opts.temperature);
    const VerifyOutcome outcome =
        csd_verify_round(batch, eval, opts.temperature, rng, cfg, memory);
    if (opts.log) opts.log->write_round(round_index, opts.gamma, outcome);
    ++round_index;

    // positions examined = accepted (incl. rescued) plus the rejected one, if any
    result.metrics.drafted += static_cast<std::uint64_t>(
        outcome.correction ? outcome.accepted_len + 1 : outcome.accepted_len);
    result.metrics.accepted += static_cast<std::uint64_t>(outcome.accepted_len);
    result.metrics.rescued += outcome.rescued_positions.size();
    result.metrics.target_calls += 1;

    for (TokenId tok : outcome.emitted) {
      context.push_back(tok);
      result.tokens.push_back(tok);
      result.metrics.emitted_tokens += 1;
      if (static_cast<int>(result.tokens.size()) >= opts.max_tokens) return result;
      if (opts.eos && tok == *opts.eos) return result;
    }
  }
  return result;
}

GenerateResult sd_generate(const LanguageModel& draft, const LanguageModel& target, TokenSpan prompt,
                           const GenerateOptions& opts, RngStream& rng) {
  CorrectionMemory unused(1);
  return generate(draft, target, prompt, opts, CsdConfig::standard_sd(), unused, rng);
}

GenerateResult vanilla_generate(const LanguageModel& target, TokenSpan prompt,
                                const GenerateOptions& opts, RngStream& rng) {
  if (opts.max_tokens < 1) throw InvariantError("max_tokens must be >= 1");
  GenerateResult result;
  std::vector<TokenId> context(prompt.begin(), prompt.end());
  while (static_cast<int>(result.tokens.size()) < opts.max_tokens) {
    const ProbDist p = softmax_with_temperature(target.logits(context), opts.temperature);
    const TokenId tok = sample(p, rng);
    context.push_back(tok);
    result.tokens.push_back(tok);
    result.metrics.emitted_tokens += 1;
    result.metrics.target_calls += 1;
    if (opts.eos && tok == *opts.eos) break;
  }
  return result;
}

}  // namespace specdec
