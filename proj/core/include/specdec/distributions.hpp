#pragma once

#include "specdec/rng.hpp"
#include "specdec/types.hpp"

namespace specdec {

// Temperature-scaled softmax with max-subtraction. T = 0 is defined as the
// exact argmax one-hot, ties broken toward the lowest token id.
ProbDist softmax_with_temperature(const Logits& logits, double temperature);

// Inverse-CDF sampling in token-id order; deterministic per rng state.
TokenId sample(const ProbDist& dist, RngStream& rng);

// max-abs and total-variation distances, used by tests and the oracle suite.
double max_abs_diff(const ProbDist& a, const ProbDist& b);
double total_variation(const ProbDist& a, const ProbDist& b);

}  // namespace specdec
