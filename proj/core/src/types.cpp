#include "specdec/types.hpp"

#include <cmath>
#include <fstream>

#include "specdec/errors.hpp"

namespace specdec {

Vocabulary::Vocabulary(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.size() < 2) {
    throw ParseError("vocabulary needs at least 2 symbols, got " + std::to_string(symbols_.size()));
  }
  index_.reserve(symbols_.size());
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    auto [it, inserted] = index_.emplace(symbols_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw ParseError("duplicate vocabulary symbol '" + symbols_[i] + "'", static_cast<long>(i + 1));
    }
  }
}

TokenId Vocabulary::id_of(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? TokenId{-1} : it->second;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path);
  std::vector<std::string> symbols;
  std::string line;
  while (std::getline(in, line)) symbols.push_back(line);
  return Vocabulary(std::move(symbols));
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary file: " + path);
  for (const auto& s : symbols_) out << s << '\n';
}

namespace {

template <typename V>
TokenId argmax_of(const V& v) {
  TokenId best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<TokenId>(i);
  }
  return best;
}

}  // namespace

TokenId Logits::argmax() const { return argmax_of(scores); }

void Logits::check_finite() const {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw InvariantError("non-finite logit at token " + std::to_string(i));
    }
  }
}

TokenId ProbDist::argmax() const { return argmax_of(probs); }

void ProbDist::validate() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvariantError("probability out of [0,1] at token " + std::to_string(i));
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw InvariantError("probabilities sum to " + std::to_string(sum));
  }
}

}  // namespace specdec
