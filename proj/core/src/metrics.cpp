#include "specdec/metrics.hpp"

#include "specdec/errors.hpp"

namespace specdec {

double estimate_speedup(const RunMetrics& metrics, const CostModel& cost) {
  if (cost.c_draft <= 0.0) throw InvariantError("c_draft must be positive");
  if (metrics.target_calls == 0) throw InvariantError("speedup undefined for a run with zero rounds");
  const double round_cost = 1.0 + static_cast<double>(cost.gamma) * cost.c_draft;
  return static_cast<double>(metrics.emitted_tokens) /
         (static_cast<double>(metrics.target_calls) * round_cost);
}

}  // namespace specdec
