#include "specdec/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "specdec/errors.hpp"
#include "specdec/rng.hpp"

namespace specdec {

namespace {

std::vector<TokenId> parse_token_list(const std::string& field, long line_no) {
  std::vector<TokenId> out;
  std::istringstream ss(field);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(static_cast<TokenId>(std::stol(tok)));
    } catch (const std::exception&) {
      throw ParseError("bad token id '" + tok + "'", line_no);
    }
  }
  return out;
}

std::string format_token_list(const std::vector<TokenId>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(toks[i]);
  }
  return out;
}

// Hexfloat keeps double round-trips bit-exact in text dumps.
std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::hexfloat << v;
  return ss.str();
}

double parse_double(const std::string& s, long line_no) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ParseError("bad real value '" + s + "'", line_no);
  }
}

}  // namespace

// ---------------------------------------------------------------- NGramModel

NGramModel::NGramModel(std::size_t vocab_size, int order, double alpha)
    : vocab_size_(vocab_size), order_(order), alpha_(alpha) {
  if (order < 1) throw InvariantError("n-gram order must be >= 1");
  if (alpha <= 0.0) throw InvariantError("smoothing alpha must be > 0");
}

std::vector<TokenId> NGramModel::padded_context(TokenSpan context) const {
  const std::size_t need = static_cast<std::size_t>(order_ - 1);
  std::vector<TokenId> ctx(need, kBosToken);
  const std::size_t take = std::min(need, context.size());
  for (std::size_t i = 0; i < take; ++i) ctx[need - take + i] = context[context.size() - take + i];
  return ctx;
}

void NGramModel::observe(TokenSpan window) {
  if (window.size() != static_cast<std::size_t>(order_)) {
    throw InvariantError("observe() expects a full n-gram window");
  }
  std::vector<TokenId> ctx(window.begin(), window.end() - 1);
  counts_[ctx][window.back()] += 1;
  totals_[ctx] += 1;
}

ProbDist NGramModel::conditional(TokenSpan context) const {
  const auto ctx = padded_context(context);
  const double v = static_cast<double>(vocab_size_);
  ProbDist out;
  out.probs.assign(vocab_size_, 0.0);

  auto tit = totals_.find(ctx);
  const double total = tit == totals_.end() ? 0.0 : static_cast<double>(tit->second);
  const double denom = total + alpha_ * v;
  for (std::size_t t = 0; t < vocab_size_; ++t) out.probs[t] = alpha_ / denom;

  auto cit = counts_.find(ctx);
  if (cit != counts_.end()) {
    for (const auto& [tok, count] : cit->second) {
      out.probs[static_cast<std::size_t>(tok)] = (static_cast<double>(count) + alpha_) / denom;
    }
  }
  return out;
}

Logits NGramModel::logits(TokenSpan context) const {
  const ProbDist p = conditional(context);
  Logits z;
  z.scores.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) z.scores[i] = std::log(p.probs[i]);
  return z;
}

bool NGramModel::operator==(const NGramModel& other) const {
  return vocab_size_ == other.vocab_size_ && order_ == other.order_ && alpha_ == other.alpha_ &&
         counts_ == other.counts_ && totals_ == other.totals_;
}

void NGramModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file: " + path);
  out << "#specdec-ngram v1 vocab=" << vocab_size_ << " order=" << order_
      << " alpha=" << format_double(alpha_) << '\n';
  for (const auto& [ctx, row] : counts_) {
    for (const auto& [tok, count] : row) {
      out << format_token_list(ctx) << '\t' << tok << '\t' << count << '\n';
    }
  }
}

NGramModel NGramModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty model file: " + path, 1);

  std::size_t vocab = 0;
  int order = 0;
  double alpha = 0.0;
  {
    std::istringstream hs(header);
    std::string magic, field;
    hs >> magic;
    if (magic != "#specdec-ngram") throw ParseError("not an n-gram model file: " + path, 1);
    hs >> magic;  // version
    if (magic != "v1") throw ParseError("unsupported n-gram model version '" + magic + "'", 1);
    while (hs >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw ParseError("malformed header field '" + field + "'", 1);
      const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
      if (key == "vocab") vocab = static_cast<std::size_t>(std::stoul(val));
      else if (key == "order") order = std::stoi(val);
      else if (key == "alpha") alpha = parse_double(val, 1);
      else throw ParseError("unknown header field '" + key + "'", 1);
    }
  }
  NGramModel model(vocab, order, alpha);

  std::string line;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string ctx_field, tok_field, count_field;
    if (!std::getline(ls, ctx_field, '\t') || !std::getline(ls, tok_field, '\t') ||
        !std::getline(ls, count_field)) {
      throw ParseError("malformed n-gram row", line_no);
    }
    const auto ctx = parse_token_list(ctx_field, line_no);
    if (ctx.size() != static_cast<std::size_t>(order - 1)) {
      throw ParseError("context length does not match order", line_no);
    }
    const TokenId tok = static_cast<TokenId>(std::stol(tok_field));
    const std::uint64_t count = std::stoull(count_field);
    model.counts_[ctx][tok] = count;
    model.totals_[ctx] += count;
  }
  return model;
}

NGramModel train_ngram(const std::vector<std::vector<TokenId>>& corpus, std::size_t vocab_size,
                       int order, double alpha) {
  if (corpus.empty()) throw ParseError("training corpus is empty");
  NGramModel model(vocab_size, order, alpha);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& doc = corpus[d];
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (doc[i] < 0 || static_cast<std::size_t>(doc[i]) >= vocab_size) {
        throw ParseError("out-of-vocabulary token id " + std::to_string(doc[i]) + " at document " +
                         std::to_string(d) + ", position " + std::to_string(i));
      }
    }
    // every length-n window ending at position i, short prefixes BOS-padded
    std::vector<TokenId> w(static_cast<std::size_t>(order), kBosToken);
    for (std::size_t i = 0; i < doc.size(); ++i) {
      std::fill(w.begin(), w.end(), kBosToken);
      const std::size_t have = std::min(static_cast<std::size_t>(order), i + 1);
      for (std::size_t k = 0; k < have; ++k) w[w.size() - have + k] = doc[i + 1 - have + k];
      model.observe(w);
    }
  }
  return model;
}

// ---------------------------------------------------------------- TableModel

TableModel::TableModel(std::size_t vocab_size, std::size_t window, Logits default_row)
    : vocab_size_(vocab_size), window_(window), default_row_(std::move(default_row)) {
  if (default_row_.size() != vocab_size_) throw InvariantError("default row length != vocab size");
  default_row_.check_finite();
}

void TableModel::set_row(std::vector<TokenId> context_window, Logits row) {
  if (context_window.size() != window_) throw InvariantError("context window length mismatch");
  if (row.size() != vocab_size_) throw InvariantError("row length != vocab size");
  row.check_finite();
  rows_[std::move(context_window)] = std::move(row);
}

Logits TableModel::logits(TokenSpan context) const {
  std::vector<TokenId> key(window_, kBosToken);
  const std::size_t take = std::min(window_, context.size());
  for (std::size_t i = 0; i < take; ++i) key[window_ - take + i] = context[context.size() - take + i];
  auto it = rows_.find(key);
  return it == rows_.end() ? default_row_ : it->second;
}

bool TableModel::operator==(const TableModel& other) const {
  auto same_logits = [](const Logits& a, const Logits& b) { return a.scores == b.scores; };
  if (vocab_size_ != other.vocab_size_ || window_ != other.window_ ||
      !same_logits(default_row_, other.default_row_) || rows_.size() != other.rows_.size()) {
    return false;
  }
  for (auto it = rows_.begin(), jt = other.rows_.begin(); it != rows_.end(); ++it, ++jt) {
    if (it->first != jt->first || !same_logits(it->second, jt->second)) return false;
  }
  return true;
}

void TableModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file: " + path);
  out << "#specdec-table v1 vocab=" << vocab_size_ << " window=" << window_ << '\n';
  auto write_row = [&](const std::string& key, const Logits& row) {
    out << key;
    for (double v : row.scores) out << '\t' << format_double(v);
    out << '\n';
  };
  write_row("default", default_row_);
  for (const auto& [ctx, row] : rows_) write_row(format_token_list(ctx), row);
}

TableModel TableModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty model file: " + path, 1);
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "#specdec-table") throw ParseError("not a table model file: " + path, 1);
  hs >> magic;
  if (magic != "v1") throw ParseError("unsupported table model version '" + magic + "'", 1);
  std::size_t vocab = 0, window = 0;
  std::string field;
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("malformed header field '" + field + "'", 1);
    const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "vocab") vocab = static_cast<std::size_t>(std::stoul(val));
    else if (key == "window") window = static_cast<std::size_t>(std::stoul(val));
    else throw ParseError("unknown header field '" + key + "'", 1);
  }

  auto parse_row = [vocab](std::istringstream& ls, long line_no) {
    Logits row;
    std::string cell;
    while (std::getline(ls, cell, '\t')) row.scores.push_back(parse_double(cell, line_no));
    if (row.size() != vocab) throw ParseError("row length does not match vocab size", line_no);
    return row;
  };

  std::string line;
  long line_no = 1;
  if (!std::getline(in, line)) throw ParseError("missing default row", line_no + 1);
  ++line_no;
  std::istringstream ds(line);
  std::string key;
  std::getline(ds, key, '\t');
  if (key != "default") throw ParseError("first row must be 'default'", line_no);
  TableModel model(vocab, window, parse_row(ds, line_no));

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::getline(ls, key, '\t');
    model.set_row(parse_token_list(key, line_no), parse_row(ls, line_no));
  }
  return model;
}

// ------------------------------------------------------------ PerturbedDraft

PerturbedDraft::PerturbedDraft(std::shared_ptr<const LanguageModel> base,
                               std::vector<std::pair<TokenId, TokenId>> swap_pairs,
                               double swap_strength, double logit_noise_sigma,
                               std::uint64_t noise_seed)
    : base_(std::move(base)),
      swap_pairs_(std::move(swap_pairs)),
      swap_strength_(swap_strength),
      logit_noise_sigma_(logit_noise_sigma),
      noise_seed_(noise_seed) {
  if (swap_strength_ < 0.0 || swap_strength_ > 1.0) throw InvariantError("swap_strength outside [0,1]");
  if (logit_noise_sigma_ < 0.0) throw InvariantError("negative noise sigma");
  std::set<TokenId> seen;
  for (const auto& [a, b] : swap_pairs_) {
    if (a == b) throw InvariantError("swap pair with identical tokens");
    if (!base_ || a < 0 || b < 0 || static_cast<std::size_t>(a) >= base_->vocab_size() ||
        static_cast<std::size_t>(b) >= base_->vocab_size()) {
      throw InvariantError("swap pair token out of vocabulary");
    }
    if (!seen.insert(a).second || !seen.insert(b).second) {
      throw InvariantError("token appears in more than one swap pair");
    }
  }
}

Logits PerturbedDraft::logits(TokenSpan context) const {
  Logits z = base_->logits(context);
  const double s = swap_strength_;
  for (const auto& [a, b] : swap_pairs_) {
    const double za = z.scores[static_cast<std::size_t>(a)];
    const double zb = z.scores[static_cast<std::size_t>(b)];
    z.scores[static_cast<std::size_t>(a)] = (1.0 - s) * za + s * zb;
    z.scores[static_cast<std::size_t>(b)] = (1.0 - s) * zb + s * za;
  }
  if (logit_noise_sigma_ > 0.0) {
    // noise is a pure function of (context, noise_seed)
    std::uint64_t h = noise_seed_;
    for (TokenId t : context) h = splitmix64(h ^ (static_cast<std::uint64_t>(t) + 0x632be59bd9b4e019ULL));
    RngStream rng(h);
    for (auto& v : z.scores) {
      // Box-Muller, one Gaussian per entry
      double u1 = rng.uniform();
      const double u2 = rng.uniform();
      if (u1 <= 0.0) u1 = 0x1.0p-53;
      v += logit_noise_sigma_ * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
  }
  return z;
}

std::shared_ptr<PerturbedDraft> make_perturbed_draft(
    std::shared_ptr<const LanguageModel> base, std::vector<std::pair<TokenId, TokenId>> swap_pairs,
    double swap_strength, double logit_noise_sigma, std::uint64_t noise_seed) {
  return std::make_shared<PerturbedDraft>(std::move(base), std::move(swap_pairs), swap_strength,
                                          logit_noise_sigma, noise_seed);
}

}  // namespace specdec
