#pragma once

#include <cstdint>

namespace specdec {

// Per-run counters. "accepted" includes rescued positions; acceptance rate
// is accepted draft tokens over drafted tokens examined.
struct RunMetrics {
  std::uint64_t drafted = 0;        // draft positions examined by verification
  std::uint64_t accepted = 0;       // surviving draft tokens, rescues included
  std::uint64_t rescued = 0;
  std::uint64_t target_calls = 0;   // verification rounds
  std::uint64_t emitted_tokens = 0;

  double acceptance_rate() const {
    return drafted == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(drafted);
  }
  // mean accepted draft tokens per round (bonus/correction excluded)
  double mean_accepted_len() const {
    return target_calls == 0 ? 0.0
                             : static_cast<double>(accepted) / static_cast<double>(target_calls);
  }

  void add(const RunMetrics& other) {
    drafted += other.drafted;
    accepted += other.accepted;
    rescued += other.rescued;
    target_calls += other.target_calls;
    emitted_tokens += other.emitted_tokens;
  }
};

// Relative cost of one draft forward pass vs one target forward pass.
// Stand-in for wall-clock speedup: vanilla decoding spends 1 target call
// per token by definition.
struct CostModel {
  double c_draft = 1.0 / 70.0;  // documentation default, mirrors a 70B/1B pairing
  int gamma = 6;
};

// emitted_tokens / (target_calls * (1 + gamma * c_draft))
double estimate_speedup(const RunMetrics& metrics, const CostModel& cost);

}  // namespace specdec
