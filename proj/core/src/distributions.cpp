#include "specdec/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "specdec/errors.hpp"

namespace specdec {

ProbDist softmax_with_temperature(const Logits& logits, double temperature) {
  logits.check_finite();
  if (temperature < 0.0) throw InvariantError("negative temperature");
  const std::size_t n = logits.size();
  ProbDist out;
  out.probs.assign(n, 0.0);

  if (temperature == 0.0) {
    out.probs[static_cast<std::size_t>(logits.argmax())] = 1.0;
    return out;
  }

  const double zmax = *std::max_element(logits.scores.begin(), logits.scores.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.probs[i] = std::exp((logits.scores[i] - zmax) / temperature);
    sum += out.probs[i];
  }
  for (auto& p : out.probs) p /= sum;
  return out;
}

TokenId sample(const ProbDist& dist, RngStream& rng) {
  const double r = rng.uniform();
  double cum = 0.0;
  TokenId last_positive = -1;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.probs[i] > 0.0) last_positive = static_cast<TokenId>(i);
    cum += dist.probs[i];
    if (r < cum) return static_cast<TokenId>(i);
  }
  // r landed in the rounding slack past the last cumulative step.
  if (last_positive < 0) throw InvariantError("sampling from an all-zero distribution");
  return last_positive;
}

double max_abs_diff(const ProbDist& a, const ProbDist& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.probs[i] - b.probs[i]));
  return m;
}

double total_variation(const ProbDist& a, const ProbDist& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a.probs[i] - b.probs[i]);
  return 0.5 * s;
}

}  // namespace specdec
