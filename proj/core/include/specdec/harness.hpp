#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specdec/engine.hpp"
#include "specdec/generate.hpp"
#include "specdec/memory.hpp"
#include "specdec/metrics.hpp"
#include "specdec/model.hpp"

namespace specdec {

enum class DecodeMode { kVanilla, kSd, kCsd, kOcmOnly, kScgOnly, kLossy };

// Parses the CLI-facing mode names {vanilla, sd, csd, ocm-only, scg-only,
// lossy}; throws ParseError listing the valid names otherwise.
DecodeMode parse_decode_mode(const std::string& name);
std::string decode_mode_name(DecodeMode mode);

// Mode plus thresholds; lossy is scg-only with its own (looser) default tau.
struct PolicySpec {
  std::string name;
  DecodeMode mode = DecodeMode::kSd;
  double tau = 0.01;
  std::uint32_t lambda = 6;

  CsdConfig to_config() const;
};

PolicySpec make_policy(const std::string& mode_name, double tau_flag = -1.0,
                       std::uint32_t lambda = 6);

struct PolicyResult {
  PolicySpec policy;
  RunMetrics metrics;
  double speedup = 0.0;           // cost-model proxy, normative
  double wall_seconds = 0.0;      // reported, non-normative
  CorrectionMemory final_memory;  // state after the run (initial copy for non-OCM modes)
};

struct CompareOptions {
  GenerateOptions gen;
  CostModel cost;
  std::uint64_t base_seed = 0;
  bool parallel_policies = false;
};

// Runs every policy over identical prompts with identical per-prompt seeds;
// each policy starts from its own copy of `initial_memory`.
std::vector<PolicyResult> compare_policies(const LanguageModel& draft, const LanguageModel& target,
                                           const std::vector<std::vector<TokenId>>& prompts,
                                           const std::vector<PolicySpec>& policies,
                                           const CorrectionMemory& initial_memory,
                                           const CompareOptions& opts);

enum class SweepParam { kTau, kLambda, kCalibrationSize };

struct SweepPoint {
  double value = 0.0;
  PolicyResult result;
};

// One compare run per value, everything else fixed. For kCalibrationSize the
// values are prefix lengths of `calibration_prompts` and the policy memory is
// re-calibrated per point.
std::vector<SweepPoint> sweep(const LanguageModel& draft, const LanguageModel& target,
                              const std::vector<std::vector<TokenId>>& prompts,
                              const PolicySpec& base_policy, SweepParam param,
                              const std::vector<double>& values,
                              const CorrectionMemory& initial_memory,
                              const std::vector<std::vector<TokenId>>& calibration_prompts,
                              const CompareOptions& opts);

}  // namespace specdec
