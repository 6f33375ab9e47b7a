#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "specdec/types.hpp"

namespace specdec {

// Frequency table over ordered (draft token, target token) divergence pairs.
// Counts only grow during a session; when a capacity is set, inserting past
// it evicts the minimum-count pair (ties: smaller lexicographic key).
class CorrectionMemory {
 public:
  using Key = std::pair<TokenId, TokenId>;

  explicit CorrectionMemory(std::uint32_t lambda,
                            std::optional<std::size_t> capacity = std::nullopt);

  std::uint32_t lambda() const { return lambda_; }
  std::optional<std::size_t> capacity() const { return capacity_; }
  std::size_t distinct_pairs() const { return table_.size(); }
  std::uint64_t total_count() const;

  std::uint64_t count(TokenId draft_tok, TokenId target_tok) const;

  // Algorithm's candidate-proposal predicate: stored count (pre-update) >= lambda.
  bool should_propose(TokenId draft_tok, TokenId target_tok) const;

  void update(TokenId draft_tok, TokenId target_tok);

  // Sums counts pairwise; lambdas must match.
  void merge(const CorrectionMemory& other);

  // UTF-8 TSV: "#csd-ocm v1 lambda=<int> capacity=<int|none>" header, then
  // one "<draft>\t<target>\t<count>" line per pair, descending count then
  // ascending key. Byte-exact round trip.
  void save(const std::string& path) const;
  static CorrectionMemory load(const std::string& path);

  const std::map<Key, std::uint64_t>& table() const { return table_; }
  bool operator==(const CorrectionMemory& other) const;

 private:
  std::uint32_t lambda_;
  std::optional<std::size_t> capacity_;
  std::map<Key, std::uint64_t> table_;
};

}  // namespace specdec
