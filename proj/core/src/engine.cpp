#include "specdec/engine.hpp"

#include <algorithm>
#include <cmath>

#include "specdec/errors.hpp"

namespace specdec {

double acceptance_prob(double p_tok, double q_tok) {
  if (q_tok <= 0.0) {
    throw InvariantError("drafted token has zero draft probability");
  }
  return std::min(1.0, p_tok / q_tok);
}

ProbDist residual_dist(const ProbDist& p, const ProbDist& q) {
  ProbDist out;
  out.probs.resize(p.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.probs[i] = std::max(0.0, p.probs[i] - q.probs[i]);
    sum += out.probs[i];
  }
  if (sum <= 0.0) {
    throw InvariantError("residual distribution is all-zero (p <= q everywhere)");
  }
  for (auto& v : out.probs) v /= sum;
  return out;
}

bool scg_gate(const Logits& target_logits_t1, TokenId draft_tok, TokenId target_star_tok,
              const ScgConfig& scg) {
  return target_logits_t1[draft_tok] - target_logits_t1[target_star_tok] >= scg.log_tau;
}

DraftBatch draft_propose(const LanguageModel& draft, TokenSpan context, int gamma,
                         double temperature, RngStream& rng) {
  if (gamma < 1) throw InvariantError("gamma must be >= 1");
  DraftBatch batch;
  std::vector<TokenId> ctx(context.begin(), context.end());
  for (int i = 0; i < gamma; ++i) {
    Logits z = draft.logits(ctx);
    ProbDist q = softmax_with_temperature(z, temperature);
    const TokenId tok = sample(q, rng);
    batch.tokens.push_back(tok);
    batch.draft_dists.push_back(std::move(q));
    batch.draft_logits.push_back(std::move(z));
    ctx.push_back(tok);
  }
  return batch;
}

TargetEval target_evaluate(const LanguageModel& target, TokenSpan context, const DraftBatch& batch,
                           double temperature) {
  TargetEval eval;
  std::vector<TokenId> ctx(context.begin(), context.end());
  for (int i = 0; i <= batch.gamma(); ++i) {
    Logits z = target.logits(ctx);
    eval.target_dists.push_back(softmax_with_temperature(z, temperature));
    eval.target_logits_t1.push_back(std::move(z));
    if (i < batch.gamma()) ctx.push_back(batch.tokens[static_cast<std::size_t>(i)]);
  }
  return eval;
}

namespace {

// Shared verification loop. `memory` is consulted and updated only when the
// config has a rescue path; sd_verify_round passes a disabled config and a
// throwaway table.
VerifyOutcome verify_round(const DraftBatch& batch, const TargetEval& eval, double /*temperature*/,
                           RngStream& rng, const CsdConfig& cfg, CorrectionMemory& memory) {
  const int gamma = batch.gamma();
  if (static_cast<int>(eval.target_dists.size()) != gamma + 1) {
    throw InvariantError("target eval length != gamma + 1");
  }

  VerifyOutcome outcome;
  ProbDist t1_cache;  // temperature-1 probs of the current position, for event records
  int rescues = 0;

  for (int i = 0; i < gamma; ++i) {
    const TokenId drafted = batch.tokens[static_cast<std::size_t>(i)];
    const ProbDist& p = eval.target_dists[static_cast<std::size_t>(i)];
    const ProbDist& q = batch.draft_dists[static_cast<std::size_t>(i)];

    const double r = rng.uniform();
    const double alpha = acceptance_prob(p[drafted], q[drafted]);
    if (r <= alpha) {
      outcome.accepted_len += 1;
      outcome.emitted.push_back(drafted);
      continue;
    }

    // rejection: the correction is sampled before any rescue decision
    const ProbDist residual = residual_dist(p, q);
    const TokenId correction = sample(residual, rng);
    if (correction == drafted) {
      throw InvariantError("correction token equals the rejected draft token");
    }

    const Logits& z1 = eval.target_logits_t1[static_cast<std::size_t>(i)];
    t1_cache = softmax_with_temperature(z1, 1.0);
    RejectionEvent event;
    event.position = i;
    event.draft_token = drafted;
    event.correction_token = correction;
    event.p_draft_t1 = t1_cache[drafted];
    event.p_star_t1 = t1_cache[correction];

    bool rescued = false;
    if (cfg.rescue_active()) {
      // pre-update count, then unconditional memory update (algorithm order)
      const bool is_freq = !cfg.ocm_enabled || memory.should_propose(drafted, correction);
      const bool is_safe = !cfg.scg_enabled || scg_gate(z1, drafted, correction, cfg.scg);
      memory.update(drafted, correction);
      const bool cap_ok = !cfg.max_rescues_per_round || rescues < *cfg.max_rescues_per_round;
      rescued = is_freq && is_safe && cap_ok;
    }
    event.rescued = rescued;
    outcome.rejection_events.push_back(event);

    if (rescued) {
      outcome.accepted_len += 1;
      outcome.rescued_positions.insert(i);
      outcome.emitted.push_back(drafted);
      ++rescues;
      continue;
    }

    outcome.correction = correction;
    outcome.emitted.push_back(correction);
    return outcome;
  }

  const TokenId bonus = sample(eval.target_dists.back(), rng);
  outcome.bonus = bonus;
  outcome.emitted.push_back(bonus);
  return outcome;
}

}  // namespace

VerifyOutcome sd_verify_round(const DraftBatch& batch, const TargetEval& eval, double temperature,
                              RngStream& rng) {
  CorrectionMemory unused(1);
  return verify_round(batch, eval, temperature, rng, CsdConfig::standard_sd(), unused);
}

VerifyOutcome csd_verify_round(const DraftBatch& batch, const TargetEval& eval, double temperature,
                               RngStream& rng, const CsdConfig& cfg, CorrectionMemory& memory) {
  return verify_round(batch, eval, temperature, rng, cfg, memory);
}

}  // namespace specdec
