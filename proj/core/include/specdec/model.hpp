#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "specdec/types.hpp"

namespace specdec {

// Stateless conditional scorer: same context, same logits. Both the draft
// and the target side of a session implement this.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual Logits logits(TokenSpan context) const = 0;
};

// Additive-alpha smoothed n-gram counts. Contexts shorter than order-1 are
// left-padded with kBosToken, so every context resolves to a strictly
// positive distribution. Logits are natural-log probabilities, meaning
// softmax(logits, 1) recovers the smoothed count ratio exactly.
class NGramModel : public LanguageModel {
 public:
  NGramModel(std::size_t vocab_size, int order, double alpha);

  std::size_t vocab_size() const override { return vocab_size_; }
  Logits logits(TokenSpan context) const override;

  int order() const { return order_; }
  double alpha() const { return alpha_; }

  void observe(TokenSpan window);  // counts one length-`order` window
  ProbDist conditional(TokenSpan context) const;

  void save(const std::string& path) const;
  static NGramModel load(const std::string& path);

  // For round-trip checks.
  bool operator==(const NGramModel& other) const;

 private:
  std::vector<TokenId> padded_context(TokenSpan context) const;

  std::size_t vocab_size_;
  int order_;
  double alpha_;
  // context -> (token -> count); std::map keeps persistence deterministic
  std::map<std::vector<TokenId>, std::map<TokenId, std::uint64_t>> counts_;
  std::map<std::vector<TokenId>, std::uint64_t> totals_;
};

// Aggregates every length-`order` window of every corpus document.
// Out-of-vocabulary ids are rejected with the offending document/position.
NGramModel train_ngram(const std::vector<std::vector<TokenId>>& corpus, std::size_t vocab_size,
                       int order, double alpha);

// Explicit context-window -> logits fixture; default row for absent windows.
class TableModel : public LanguageModel {
 public:
  TableModel(std::size_t vocab_size, std::size_t window, Logits default_row);

  std::size_t vocab_size() const override { return vocab_size_; }
  Logits logits(TokenSpan context) const override;

  std::size_t window() const { return window_; }
  void set_row(std::vector<TokenId> context_window, Logits row);

  void save(const std::string& path) const;
  static TableModel load(const std::string& path);
  bool operator==(const TableModel& other) const;

 private:
  std::size_t vocab_size_;
  std::size_t window_;
  Logits default_row_;
  std::map<std::vector<TokenId>, Logits> rows_;
};

// Wraps a base model with pairwise logit mixing and optional deterministic
// Gaussian logit noise; the engineered source of systematic draft/target
// divergences.
class PerturbedDraft : public LanguageModel {
 public:
  PerturbedDraft(std::shared_ptr<const LanguageModel> base,
                 std::vector<std::pair<TokenId, TokenId>> swap_pairs, double swap_strength,
                 double logit_noise_sigma, std::uint64_t noise_seed);

  std::size_t vocab_size() const override { return base_->vocab_size(); }
  Logits logits(TokenSpan context) const override;

  const std::vector<std::pair<TokenId, TokenId>>& swap_pairs() const { return swap_pairs_; }

 private:
  std::shared_ptr<const LanguageModel> base_;
  std::vector<std::pair<TokenId, TokenId>> swap_pairs_;
  double swap_strength_;
  double logit_noise_sigma_;
  std::uint64_t noise_seed_;
};

std::shared_ptr<PerturbedDraft> make_perturbed_draft(
    std::shared_ptr<const LanguageModel> base, std::vector<std::pair<TokenId, TokenId>> swap_pairs,
    double swap_strength, double logit_noise_sigma, std::uint64_t noise_seed);

}  // namespace specdec
