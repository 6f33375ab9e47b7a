#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "specdec/distributions.hpp"
#include "specdec/memory.hpp"
#include "specdec/metrics.hpp"
#include "specdec/model.hpp"
#include "specdec/rng.hpp"
#include "specdec/types.hpp"

namespace specdec {

// gamma drafted tokens plus the per-step draft distributions that produced
// them. draft_dists[i] = softmax(draft_logits[i], T).
struct DraftBatch {
  std::vector<TokenId> tokens;
  std::vector<ProbDist> draft_dists;
  std::vector<Logits> draft_logits;

  int gamma() const { return static_cast<int>(tokens.size()); }
};

// Target-side view of a drafted batch: gamma+1 session-temperature
// distributions plus the raw (temperature-1 basis) logits the SCG gate reads.
struct TargetEval {
  std::vector<ProbDist> target_dists;
  std::vector<Logits> target_logits_t1;
};

struct RejectionEvent {
  int position = 0;
  TokenId draft_token = -1;
  TokenId correction_token = -1;
  double p_draft_t1 = 0.0;  // temperature-1 target probability of the draft token
  double p_star_t1 = 0.0;   // temperature-1 target probability of the correction
  bool rescued = false;
};

// Result of one verification round. Exactly one of correction/bonus is set;
// bonus means all gamma positions were accepted or rescued.
struct VerifyOutcome {
  int accepted_len = 0;  // n of the algorithm; rescued positions count
  std::set<int> rescued_positions;
  std::optional<TokenId> correction;
  std::optional<TokenId> bonus;
  std::vector<TokenId> emitted;
  std::vector<RejectionEvent> rejection_events;
};

// Semantic consistency gate configuration. The threshold tau lives in (0,1];
// the comparison happens in raw-logit space against ln(tau).
struct ScgConfig {
  double tau;
  double log_tau;

  explicit ScgConfig(double tau_in) : tau(tau_in), log_tau(std::log(tau_in)) {}
};

// Verification policy: full CSD enables both gates; the ablation variants
// enable exactly one. A disabled gate contributes `true` to the rescue
// conjunction; with both disabled no rescue path exists and the round is
// standard speculative decoding.
struct CsdConfig {
  bool ocm_enabled = false;
  bool scg_enabled = false;
  ScgConfig scg{0.01};
  std::optional<int> max_rescues_per_round;  // off by default

  bool rescue_active() const { return ocm_enabled || scg_enabled; }

  static CsdConfig standard_sd() { return {}; }
  static CsdConfig full(double tau = 0.01) { return {true, true, ScgConfig(tau), std::nullopt}; }
  static CsdConfig ocm_only() { return {true, false, ScgConfig(0.01), std::nullopt}; }
  static CsdConfig scg_only(double tau = 0.01) { return {false, true, ScgConfig(tau), std::nullopt}; }
  static CsdConfig static_lossy(double tau = 0.6) { return scg_only(tau); }
};

// min(1, p/q); q must be positive for a token that was actually drafted.
double acceptance_prob(double p_tok, double q_tok);

// norm(max(0, p - q)); errors when p <= q everywhere (unreachable after a
// legitimate rejection).
ProbDist residual_dist(const ProbDist& p, const ProbDist& q);

// Raw-logit admissibility check: z(draft) - z(correction) >= ln(tau).
bool scg_gate(const Logits& target_logits_t1, TokenId draft_tok, TokenId target_star_tok,
              const ScgConfig& scg);

// Autoregressive drafting of gamma tokens at temperature T.
DraftBatch draft_propose(const LanguageModel& draft, TokenSpan context, int gamma, double temperature,
                         RngStream& rng);

// Target distributions for positions 1..gamma+1. With desk-scale backends the
// "parallel pass" is gamma+1 lookups; the contract is positional correctness.
TargetEval target_evaluate(const LanguageModel& target, TokenSpan context, const DraftBatch& batch,
                           double temperature);

// Standard rejection-sampling verification (no rescue path).
VerifyOutcome sd_verify_round(const DraftBatch& batch, const TargetEval& eval, double temperature,
                              RngStream& rng);

// Calibrated verification: on rejection, sample the correction, consult the
// memory (pre-update count) and the SCG gate, update the memory, and either
// rescue the position and continue or stop with the correction.
VerifyOutcome csd_verify_round(const DraftBatch& batch, const TargetEval& eval, double temperature,
                               RngStream& rng, const CsdConfig& cfg, CorrectionMemory& memory);

}  // namespace specdec
