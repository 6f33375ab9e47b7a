#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace specdec {

using TokenId = std::int32_t;

// Reserved padding token for contexts shorter than a model's window.
// Every vocabulary file must carry it at line 0.
inline constexpr TokenId kBosToken = 0;

// Ordered set of distinct string symbols; token id = position.
class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> symbols);

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(TokenId id) const { return symbols_.at(static_cast<std::size_t>(id)); }
  // -1 if the symbol is unknown.
  TokenId id_of(const std::string& symbol) const;
  bool contains(TokenId id) const { return id >= 0 && static_cast<std::size_t>(id) < symbols_.size(); }

  // One symbol per line, UTF-8, line number = token id.
  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, TokenId> index_;
};

// Raw pre-softmax scores over a vocabulary. All entries finite.
struct Logits {
  std::vector<double> scores;

  std::size_t size() const { return scores.size(); }
  double operator[](TokenId t) const { return scores[static_cast<std::size_t>(t)]; }

  // Lowest token id among the maxima.
  TokenId argmax() const;
  void check_finite() const;  // throws InvariantError on NaN/inf
};

// Normalized probability vector. Entries in [0,1], sum 1 within 1e-9.
struct ProbDist {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](TokenId t) const { return probs[static_cast<std::size_t>(t)]; }

  TokenId argmax() const;
  void validate() const;  // throws InvariantError if not a distribution
};

using TokenSpan = std::span<const TokenId>;

}  // namespace specdec
