#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "specdec/types.hpp"

namespace specdec {

// One rejected (draft, correction) observation with the target model's
// temperature-1 probabilities of both tokens.
struct RejectionRecord {
  TokenId draft_tok;
  TokenId target_tok;
  double p_draft_t1;
  double p_star_t1;
  int round = 0;
  int position = 0;
};

// Aggregated rejection-pattern statistics: per-pair counts plus per-pair
// log10 probability-ratio samples.
struct PatternStats {
  using Key = std::pair<TokenId, TokenId>;

  std::map<Key, std::uint64_t> counts;
  std::map<Key, std::vector<double>> log10_ratios;
  std::uint64_t total = 0;

  void merge(const PatternStats& other);
};

PatternStats collect(const std::vector<RejectionRecord>& records);

// Share of total rejections held by the top ceil(head_fraction * #patterns)
// patterns (count descending, ties by ascending key).
double head_coverage(const PatternStats& stats, double head_fraction);

struct RatioHistogram {
  std::uint64_t underflow = 0;
  std::vector<std::uint64_t> bins;  // half-open [edge_i, edge_{i+1})
  std::uint64_t overflow = 0;
};

RatioHistogram ratio_histogram(const PatternStats& stats, PatternStats::Key pair,
                               const std::vector<double>& bin_edges);

// Replays a JSON-lines round log (sd_engine event-log schema) into stats.
PatternStats analyze_log(const std::string& event_log_path);

// TSV report: pair, count, share, cumulative share; count-descending order.
void write_pattern_report(const PatternStats& stats, const std::string& path);
void write_histogram_report(const RatioHistogram& hist, const std::vector<double>& bin_edges,
                            const std::string& path);

}  // namespace specdec
