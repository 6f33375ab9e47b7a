#pragma once

#include <cstdint>
#include <vector>

#include "specdec/generate.hpp"
#include "specdec/memory.hpp"
#include "specdec/model.hpp"

namespace specdec {

struct CalibrationOptions {
  int gamma = 6;
  double temperature = 0.6;  // broadens exposure to diverse valid token pairs
  int max_tokens_per_prompt = 64;
  std::uint64_t base_seed = 0;
  int workers = 1;
};

// Phase-1 prior calibration: run standard speculative decoding over the
// prompts and count every rejection pair (draft, correction) into a fresh
// memory. Models are read-only; nothing is updated but the table. Each
// prompt gets its own derived seed, so corpus edits leave unrelated prompts
// untouched, and workers can split prompts without changing the result.
CorrectionMemory calibrate(const LanguageModel& draft, const LanguageModel& target,
                           const std::vector<std::vector<TokenId>>& prompts,
                           const CalibrationOptions& opts, std::uint32_t lambda);

// Same pass, counts added onto an existing table; lambda must match.
void calibrate_incremental(CorrectionMemory& memory, const LanguageModel& draft,
                           const LanguageModel& target,
                           const std::vector<std::vector<TokenId>>& prompts,
                           const CalibrationOptions& opts);

}  // namespace specdec
