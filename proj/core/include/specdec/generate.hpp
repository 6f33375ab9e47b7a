#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "specdec/engine.hpp"
#include "specdec/metrics.hpp"

namespace specdec {

// JSON-lines round log, one record per verification round. Schema (fields
// stable, consumed by the analysis module):
//   {"round":int, "gamma":int, "accepted_len":int, "rescued_positions":[int],
//    "rejections":[{"position":int,"draft_token":int,"correction_token":int,
//                   "p_draft_t1":real,"p_star_t1":real,"rescued":bool}],
//    "correction_token":int|null, "bonus_token":int|null, "emitted":[int]}
class EventLogWriter {
 public:
  explicit EventLogWriter(std::ostream& out) : out_(&out) {}
  void write_round(int round_index, int gamma, const VerifyOutcome& outcome);

 private:
  std::ostream* out_;
};

struct GenerateOptions {
  int gamma = 6;
  double temperature = 0.0;
  int max_tokens = 128;
  std::optional<TokenId> eos;
  EventLogWriter* log = nullptr;  // optional
};

struct GenerateResult {
  std::vector<TokenId> tokens;  // generated tokens only, prompt excluded
  RunMetrics metrics;
};

// Propose/evaluate/verify loop. With cfg = CsdConfig::standard_sd() this is
// standard speculative decoding; the memory is still threaded through so CSD
// policies can resume from a calibrated table.
GenerateResult generate(const LanguageModel& draft, const LanguageModel& target, TokenSpan prompt,
                        const GenerateOptions& opts, const CsdConfig& cfg, CorrectionMemory& memory,
                        RngStream& rng);

GenerateResult sd_generate(const LanguageModel& draft, const LanguageModel& target, TokenSpan prompt,
                           const GenerateOptions& opts, RngStream& rng);

// Plain autoregressive target sampling; one target call per token.
GenerateResult vanilla_generate(const LanguageModel& target, TokenSpan prompt,
                                const GenerateOptions& opts, RngStream& rng);

}  // namespace specdec
