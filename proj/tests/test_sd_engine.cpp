#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "specdec/engine.hpp"
#include "specdec/errors.hpp"
#include "specdec/generate.hpp"
#include "specdec/model.hpp"

using namespace specdec;

namespace {

Logits log_row(const std::vector<double>& probs) {
  Logits z;
  for (double p : probs) z.scores.push_back(std::log(p));
  return z;
}

ProbDist dist(const std::vector<double>& probs) { return ProbDist{probs}; }

// Random strictly-positive distribution.
ProbDist random_dist(std::size_t n, RngStream& rng) {
  ProbDist d;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d.probs.push_back(0.01 + rng.uniform());
    sum += d.probs.back();
  }
  for (auto& v : d.probs) v /= sum;
  return d;
}

// Analytic one-step output law of standard SD verification:
//   law(t) = q(t) * min(1, p(t)/q(t)) + [sum_x q(x)(1 - min(1, p(x)/q(x)))] * p'(t)
ProbDist one_step_law(const ProbDist& p, const ProbDist& q) {
  const std::size_t n = p.size();
  double reject_mass = 0.0;
  ProbDist law;
  law.probs.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const double alpha = std::min(1.0, p.probs[t] / q.probs[t]);
    law.probs[t] = q.probs[t] * alpha;
    reject_mass += q.probs[t] * (1.0 - alpha);
  }
  if (reject_mass > 0.0) {
    const ProbDist residual = residual_dist(p, q);
    for (std::size_t t = 0; t < n; ++t) law.probs[t] += reject_mass * residual.probs[t];
  }
  return law;
}

}  // namespace

TEST_CASE("acceptance_prob: closed-form cases") {
  CHECK(acceptance_prob(0.3, 0.6) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(acceptance_prob(0.4, 0.4) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(acceptance_prob(0.0, 0.2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(acceptance_prob(0.9, 0.1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(acceptance_prob(0.5, 0.0), InvariantError);
}

TEST_CASE("residual_dist: closed-form cases") {
  CHECK(residual_dist(dist({0.5, 0.5}), dist({1.0, 0.0})).probs == std::vector<double>{0.0, 1.0});
  const ProbDist r = residual_dist(dist({0.7, 0.3}), dist({0.3, 0.7}));
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(0.0).epsilon(1e-12));
  // T=0 one-hots: residual equals p
  const ProbDist r2 = residual_dist(dist({0.0, 1.0, 0.0}), dist({1.0, 0.0, 0.0}));
  CHECK(r2.probs == std::vector<double>{0.0, 1.0, 0.0});
  CHECK_THROWS_AS(residual_dist(dist({0.5, 0.5}), dist({0.5, 0.5})), InvariantError);
}

TEST_CASE("single-position losslessness: one-step law equals p for random p, q") {
  RngStream rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + (rng.next_u64() % 7);
    const ProbDist p = random_dist(n, rng);
    const ProbDist q = random_dist(n, rng);
    const ProbDist law = one_step_law(p, q);
    CHECK(max_abs_diff(law, p) < 1e-9);
  }
}

TEST_CASE("draft_propose: deterministic argmax chain at T=0") {
  auto table = std::make_shared<TableModel>(3, 1, log_row({0.8, 0.1, 0.1}));
  table->set_row({0}, log_row({0.1, 0.8, 0.1}));
  table->set_row({1}, log_row({0.1, 0.1, 0.8}));
  table->set_row({2}, log_row({0.8, 0.1, 0.1}));

  RngStream rng(0);
  const std::vector<TokenId> ctx{0};
  const DraftBatch batch = draft_propose(*table, ctx, 3, 0.0, rng);
  CHECK(batch.tokens == std::vector<TokenId>{1, 2, 0});
  CHECK(batch.draft_dists.size() == 3);
  CHECK(batch.draft_logits.size() == 3);
  // draft_dists[i] = softmax(draft_logits[i], T)
  for (int i = 0; i < 3; ++i) {
    const ProbDist again = softmax_with_temperature(batch.draft_logits[i], 0.0);
    CHECK(max_abs_diff(again, batch.draft_dists[i]) == 0.0);
  }
}

TEST_CASE("draft_propose: gamma=1 and seeded determinism") {
  const auto model = train_ngram({{1, 2, 3, 1, 2}}, 4, 2, 0.5);
  const std::vector<TokenId> ctx{1};
  RngStream a(77), b(77);
  const DraftBatch one = draft_propose(model, ctx, 1, 1.0, a);
  CHECK(one.tokens.size() == 1);

  RngStream c(77);
  const DraftBatch x = draft_propose(model, ctx, 5, 0.9, b);
  const DraftBatch y = draft_propose(model, ctx, 5, 0.9, c);
  CHECK(x.tokens == y.tokens);
}

TEST_CASE("target_evaluate: positional correctness and gamma+1 rows") {
  auto table = std::make_shared<TableModel>(3, 1, log_row({0.2, 0.5, 0.3}));
  table->set_row({1}, log_row({0.6, 0.2, 0.2}));
  table->set_row({2}, log_row({0.1, 0.1, 0.8}));

  DraftBatch batch;
  batch.tokens = {1, 2};
  batch.draft_dists = {dist({1.0, 0.0, 0.0}), dist({1.0, 0.0, 0.0})};
  batch.draft_logits = {log_row({0.8, 0.1, 0.1}), log_row({0.8, 0.1, 0.1})};

  const std::vector<TokenId> ctx{2};
  const TargetEval eval = target_evaluate(*table, ctx, batch, 1.0);
  REQUIRE(eval.target_dists.size() == 3);
  // position 0 conditions on ctx=[2], position 1 on [...,1], bonus on [...,2]
  CHECK(eval.target_dists[0][2] == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(eval.target_dists[1][0] == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(eval.target_dists[2][2] == doctest::Approx(0.8).epsilon(1e-9));

  // target = draft: p_i = q_i for all i
  const DraftBatch own = draft_propose(*table, ctx, 2, 1.0, *std::make_unique<RngStream>(5));
  const TargetEval self_eval = target_evaluate(*table, ctx, own, 1.0);
  for (int i = 0; i < 2; ++i) {
    CHECK(max_abs_diff(self_eval.target_dists[static_cast<std::size_t>(i)],
                       own.draft_dists[static_cast<std::size_t>(i)]) < 1e-12);
  }
}

TEST_CASE("sd_verify_round: p=q accepts everything and draws a bonus") {
  DraftBatch batch;
  batch.tokens = {1, 2};
  batch.draft_dists = {dist({0.2, 0.5, 0.3}), dist({0.1, 0.2, 0.7})};
  TargetEval eval;
  eval.target_dists = {batch.draft_dists[0], batch.draft_dists[1], dist({0.0, 1.0, 0.0})};
  eval.target_logits_t1 = {log_row({0.2, 0.5, 0.3}), log_row({0.1, 0.2, 0.7}),
                           log_row({0.001, 0.998, 0.001})};

  RngStream rng(1);
  const VerifyOutcome out = sd_verify_round(batch, eval, 1.0, rng);
  CHECK(out.accepted_len == 2);
  CHECK(out.rescued_positions.empty());
  CHECK_FALSE(out.correction.has_value());
  REQUIRE(out.bonus.has_value());
  CHECK(*out.bonus == 1);
  CHECK(out.emitted == std::vector<TokenId>{1, 2, 1});
}

TEST_CASE("sd_verify_round: zero target mass on the draft rejects at position 1") {
  DraftBatch batch;
  batch.tokens = {0};
  batch.draft_dists = {dist({1.0, 0.0, 0.0})};
  TargetEval eval;
  eval.target_dists = {dist({0.0, 0.25, 0.75}), dist({1.0, 0.0, 0.0})};
  eval.target_logits_t1 = {log_row({1e-12, 0.25, 0.75}), log_row({0.999998, 1e-6, 1e-6})};

  RngStream rng(1);
  const VerifyOutcome out = sd_verify_round(batch, eval, 1.0, rng);
  CHECK(out.accepted_len == 0);
  REQUIRE(out.correction.has_value());
  CHECK(*out.correction != 0);
  CHECK((*out.correction == 1 || *out.correction == 2));
  CHECK(out.emitted.size() == 1);
  CHECK(out.rejection_events.size() == 1);
  CHECK(out.rejection_events[0].position == 0);
}

TEST_CASE("sd_verify_round: correction never equals the rejected draft token") {
  RngStream fix_rng(404);
  for (int trial = 0; trial < 300; ++trial) {
    DraftBatch batch;
    TargetEval eval;
    const std::size_t v = 3;
    for (int i = 0; i < 2; ++i) {
      const ProbDist q = random_dist(v, fix_rng);
      batch.draft_dists.push_back(q);
      batch.draft_logits.push_back(log_row(q.probs));
      batch.tokens.push_back(static_cast<TokenId>(fix_rng.next_u64() % v));
      const ProbDist p = random_dist(v, fix_rng);
      eval.target_dists.push_back(p);
      eval.target_logits_t1.push_back(log_row(p.probs));
    }
    const ProbDist bonus = random_dist(v, fix_rng);
    eval.target_dists.push_back(bonus);
    eval.target_logits_t1.push_back(log_row(bonus.probs));

    RngStream rng(trial);
    const VerifyOutcome out = sd_verify_round(batch, eval, 1.0, rng);
    CHECK(out.accepted_len >= 0);
    CHECK(out.accepted_len <= 2);
    if (out.correction) {
      const auto pos = static_cast<std::size_t>(out.accepted_len);
      CHECK(*out.correction != batch.tokens[pos]);
    }
  }
}

TEST_CASE("sd_verify_round: Monte-Carlo first-token law matches the analytic law") {
  // vocab 3, gamma 2, fixed p/q fixtures
  DraftBatch batch_template;
  const ProbDist q1 = dist({0.5, 0.3, 0.2});
  const ProbDist q2 = dist({0.25, 0.25, 0.5});
  const ProbDist p1 = dist({0.2, 0.45, 0.35});
  const ProbDist p2 = dist({0.3, 0.4, 0.3});
  const ProbDist bonus = dist({0.6, 0.2, 0.2});

  const ProbDist expected = one_step_law(p1, q1);
  std::vector<double> freq(3, 0.0);
  const int samples = 200000;
  RngStream rng(31337);
  for (int s = 0; s < samples; ++s) {
    DraftBatch batch;
    const TokenId t1 = sample(q1, rng);
    const TokenId t2 = sample(q2, rng);
    batch.tokens = {t1, t2};
    batch.draft_dists = {q1, q2};
    TargetEval eval;
    eval.target_dists = {p1, p2, bonus};
    eval.target_logits_t1 = {log_row(p1.probs), log_row(p2.probs), log_row(bonus.probs)};
    const VerifyOutcome out = sd_verify_round(batch, eval, 1.0, rng);
    freq[static_cast<std::size_t>(out.emitted.front())] += 1.0;
  }
  double tv = 0.0;
  for (int t = 0; t < 3; ++t) tv += std::fabs(freq[static_cast<std::size_t>(t)] / samples -
                                              expected[t]);
  CHECK(tv / 2.0 < 0.01);
  // ...and the analytic law is the target law (losslessness)
  CHECK(max_abs_diff(expected, p1) < 1e-9);
}

TEST_CASE("sd_generate: draft = target accepts everything") {
  const auto model = train_ngram({{1, 2, 3, 1, 2, 3}}, 4, 2, 0.5);
  GenerateOptions opts;
  opts.gamma = 3;
  opts.temperature = 1.0;
  opts.max_tokens = 40;
  RngStream rng(9);
  const std::vector<TokenId> prompt{1};
  const GenerateResult result = sd_generate(model, model, prompt, opts, rng);
  CHECK(result.metrics.acceptance_rate() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(result.metrics.rescued == 0);
  // gamma + 1 tokens per round; 40 divides evenly into ten rounds of four
  CHECK(result.metrics.target_calls == 10);
  CHECK(result.metrics.emitted_tokens == 40);
  CHECK(result.tokens.size() == 40);
}

TEST_CASE("sd_generate: max_tokens=1 truncates to a single token") {
  const auto model = train_ngram({{1, 2, 3}}, 4, 2, 0.5);
  GenerateOptions opts;
  opts.gamma = 4;
  opts.temperature = 1.0;
  opts.max_tokens = 1;
  RngStream rng(9);
  const std::vector<TokenId> prompt{1};
  const GenerateResult result = sd_generate(model, model, prompt, opts, rng);
  CHECK(result.tokens.size() == 1);
  CHECK(result.metrics.target_calls == 1);
}

TEST_CASE("sd_generate: seeded runs are identical; eos stops generation") {
  const auto target = train_ngram({{1, 2, 3, 1, 2, 3, 2, 2}}, 4, 3, 0.5);
  const auto draft = train_ngram({{1, 2, 3, 1, 2, 3, 2, 2}}, 4, 2, 0.5);
  GenerateOptions opts;
  opts.gamma = 2;
  opts.temperature = 0.8;
  opts.max_tokens = 30;
  const std::vector<TokenId> prompt{1, 2};

  RngStream a(55), b(55);
  const GenerateResult ra = sd_generate(draft, target, prompt, opts, a);
  const GenerateResult rb = sd_generate(draft, target, prompt, opts, b);
  CHECK(ra.tokens == rb.tokens);
  CHECK(ra.metrics.drafted == rb.metrics.drafted);
  CHECK(ra.metrics.accepted == rb.metrics.accepted);

  opts.eos = ra.tokens.front();
  RngStream c(55);
  const GenerateResult rc = sd_generate(draft, target, prompt, opts, c);
  CHECK(rc.tokens.size() <= ra.tokens.size());
  CHECK(rc.tokens.back() == *opts.eos);
}
