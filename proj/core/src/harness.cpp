#include "specdec/harness.hpp"

#include <chrono>
#include <thread>

#include "specdec/calibrate.hpp"
#include "specdec/errors.hpp"

namespace specdec {

DecodeMode parse_decode_mode(const std::string& name) {
  if (name == "vanilla") return DecodeMode::kVanilla;
  if (name == "sd") return DecodeMode::kSd;
  if (name == "csd") return DecodeMode::kCsd;
  if (name == "ocm-only") return DecodeMode::kOcmOnly;
  if (name == "scg-only") return DecodeMode::kScgOnly;
  if (name == "lossy") return DecodeMode::kLossy;
  throw ParseError("unknown policy '" + name +
                   "' (valid: vanilla, sd, csd, ocm-only, scg-only, lossy)");
}

std::string decode_mode_name(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::kVanilla: return "vanilla";
    case DecodeMode::kSd: return "sd";
    case DecodeMode::kCsd: return "csd";
    case DecodeMode::kOcmOnly: return "ocm-only";
    case DecodeMode::kScgOnly: return "scg-only";
    case DecodeMode::kLossy: return "lossy";
  }
  throw InvariantError("unreachable decode mode");
}

CsdConfig PolicySpec::to_config() const {
  switch (mode) {
    case DecodeMode::kVanilla:
    case DecodeMode::kSd: return CsdConfig::standard_sd();
    case DecodeMode::kCsd: return CsdConfig::full(tau);
    case DecodeMode::kOcmOnly: return CsdConfig::ocm_only();
    case DecodeMode::kScgOnly: return CsdConfig::scg_only(tau);
    case DecodeMode::kLossy: return CsdConfig::static_lossy(tau);
  }
  throw InvariantError("unreachable decode mode");
}

PolicySpec make_policy(const std::string& mode_name, double tau_flag, std::uint32_t lambda) {
  PolicySpec spec;
  spec.name = mode_name;
  spec.mode = parse_decode_mode(mode_name);
  spec.lambda = lambda;
  if (tau_flag > 0.0) {
    spec.tau = tau_flag;
  } else {
    spec.tau = spec.mode == DecodeMode::kLossy ? 0.6 : 0.01;
  }
  return spec;
}

namespace {

PolicyResult run_policy(const LanguageModel& draft, const LanguageModel& target,
                        const std::vector<std::vector<TokenId>>& prompts, const PolicySpec& policy,
                        const CorrectionMemory& initial_memory, const CompareOptions& opts) {
  PolicyResult out{policy, {}, 0.0, 0.0, initial_memory};
  const CsdConfig cfg = policy.to_config();

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    RngStream rng(derive_seed(opts.base_seed, i));
    if (policy.mode == DecodeMode::kVanilla) {
      out.metrics.add(vanilla_generate(target, prompts[i], opts.gen, rng).metrics);
    } else {
      out.metrics.add(
          generate(draft, target, prompts[i], opts.gen, cfg, out.final_memory, rng).metrics);
    }
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  CostModel cost = opts.cost;
  cost.gamma = opts.gen.gamma;
  if (policy.mode == DecodeMode::kVanilla) {
    out.speedup = 1.0;  // vanilla is the cost-model baseline by definition
  } else {
    out.speedup = estimate_speedup(out.metrics, cost);
  }
  return out;
}

}  // namespace

std::vector<PolicyResult> compare_policies(const LanguageModel& draft, const LanguageModel& target,
                                           const std::vector<std::vector<TokenId>>& prompts,
                                           const std::vector<PolicySpec>& policies,
                                           const CorrectionMemory& initial_memory,
                                           const CompareOptions& opts) {
  if (policies.empty()) throw ParseError("compare_policies needs at least one policy");
  std::vector<PolicyResult> results;
  results.reserve(policies.size());

  if (!opts.parallel_policies) {
    for (const auto& policy : policies) {
      results.push_back(run_policy(draft, target, prompts, policy, initial_memory, opts));
    }
    return results;
  }

  results.resize(policies.size(), PolicyResult{{}, {}, 0.0, 0.0, initial_memory});
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    pool.emplace_back([&, i] {
      results[i] = run_policy(draft, target, prompts, policies[i], initial_memory, opts);
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

std::vector<SweepPoint> sweep(const LanguageModel& draft, const LanguageModel& target,
                              const std::vector<std::vector<TokenId>>& prompts,
                              const PolicySpec& base_policy, SweepParam param,
                              const std::vector<double>& values,
                              const CorrectionMemory& initial_memory,
                              const std::vector<std::vector<TokenId>>& calibration_prompts,
                              const CompareOptions& opts) {
  if (values.empty()) throw ParseError("sweep needs at least one value");
  std::vector<SweepPoint> points;
  for (double v : values) {
    PolicySpec policy = base_policy;
    CorrectionMemory memory = initial_memory;
    switch (param) {
      case SweepParam::kTau:
        policy.tau = v;
        break;
      case SweepParam::kLambda: {
        policy.lambda = static_cast<std::uint32_t>(v);
        CorrectionMemory relabeled(policy.lambda, memory.capacity());
        for (const auto& [key, c] : memory.table()) {
          for (std::uint64_t k = 0; k < c; ++k) relabeled.update(key.first, key.second);
        }
        memory = std::move(relabeled);
        break;
      }
      case SweepParam::kCalibrationSize: {
        const auto n = std::min(calibration_prompts.size(), static_cast<std::size_t>(v));
        CalibrationOptions cal;
        cal.gamma = opts.gen.gamma;
        cal.base_seed = opts.base_seed;
        memory = CorrectionMemory(policy.lambda, memory.capacity());
        if (n > 0) {
          const std::vector<std::vector<TokenId>> subset(calibration_prompts.begin(),
                                                         calibration_prompts.begin() +
                                                             static_cast<std::ptrdiff_t>(n));
          calibrate_incremental(memory, draft, target, subset, cal);
        }
        break;
      }
    }
    points.push_back({v, run_policy(draft, target, prompts, policy, memory, opts)});
  }
  return points;
}

}  // namespace specdec
