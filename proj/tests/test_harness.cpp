#include <doctest.h>

#include <cmath>
#include <memory>

#include "specdec/calibrate.hpp"
#include "specdec/errors.hpp"
#include "specdec/harness.hpp"
#include "specdec/model.hpp"

using namespace specdec;

namespace {

std::shared_ptr<NGramModel> small_target() {
  std::vector<TokenId> doc;
  for (int i = 0; i < 300; ++i) doc.push_back(1 + (i * 7 % 9));
  return std::make_shared<NGramModel>(train_ngram({doc}, 10, 2, 0.1));
}

std::vector<std::vector<TokenId>> small_prompts() {
  return {{1, 2}, {3, 4}, {5, 6}, {7, 8}, {2, 9}};
}

}  // namespace

TEST_CASE("estimate_speedup: hand-checked values") {
  CostModel cost;
  cost.c_draft = 0.05;
  cost.gamma = 6;
  RunMetrics m;
  m.emitted_tokens = 200;
  m.target_calls = 50;
  // 200 / (50 * (1 + 6*0.05)) = 200 / 65
  CHECK(estimate_speedup(m, cost) == doctest::Approx(200.0 / 65.0).epsilon(1e-12));

  // perfect acceptance: gamma+1 tokens per target call
  RunMetrics perfect;
  perfect.emitted_tokens = 70;
  perfect.target_calls = 10;
  CHECK(estimate_speedup(perfect, cost) ==
        doctest::Approx(7.0 / (1.0 + 6 * 0.05)).epsilon(1e-12));

  RunMetrics empty;
  CHECK_THROWS_AS(estimate_speedup(empty, cost), InvariantError);
}

TEST_CASE("estimate_speedup: monotone in tokens per call and in draft cost") {
  CostModel cost;
  cost.gamma = 6;
  RunMetrics lo, hi;
  lo.emitted_tokens = 120;
  hi.emitted_tokens = 180;
  lo.target_calls = hi.target_calls = 40;
  CHECK(estimate_speedup(hi, cost) > estimate_speedup(lo, cost));

  CostModel cheap = cost, pricey = cost;
  cheap.c_draft = 0.01;
  pricey.c_draft = 0.2;
  CHECK(estimate_speedup(hi, cheap) > estimate_speedup(hi, pricey));
}

TEST_CASE("parse_decode_mode: all names round trip; unknown rejected") {
  const std::vector<std::string> names{"vanilla", "sd", "csd", "ocm-only", "scg-only", "lossy"};
  for (const auto& name : names) {
    CHECK(decode_mode_name(parse_decode_mode(name)) == name);
  }
  try {
    parse_decode_mode("turbo");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    for (const auto& name : names) {
      CHECK(msg.find(name) != std::string::npos);  // error lists the valid set
    }
  }
}

TEST_CASE("make_policy: defaults and the lossy tau override") {
  const PolicySpec csd = make_policy("csd");
  CHECK(csd.tau == doctest::Approx(0.01));
  CHECK(csd.lambda == 6);

  const PolicySpec lossy = make_policy("lossy");
  CHECK(lossy.tau == doctest::Approx(0.6));
  CHECK(lossy.mode == DecodeMode::kLossy);

  const PolicySpec custom = make_policy("lossy", 0.3);
  CHECK(custom.tau == doctest::Approx(0.3));

  const PolicySpec scg = make_policy("scg-only", -1.0, 9);
  CHECK(scg.tau == doctest::Approx(0.01));
  CHECK(scg.lambda == 9);
}

TEST_CASE("PolicySpec::to_config mirrors the mode") {
  CHECK_FALSE(make_policy("sd").to_config().rescue_active());
  const CsdConfig full = make_policy("csd").to_config();
  CHECK(full.ocm_enabled);
  CHECK(full.scg_enabled);
  const CsdConfig ocm = make_policy("ocm-only").to_config();
  CHECK(ocm.ocm_enabled);
  CHECK_FALSE(ocm.scg_enabled);
  const CsdConfig lossy = make_policy("lossy").to_config();
  CHECK_FALSE(lossy.ocm_enabled);
  CHECK(lossy.scg_enabled);
  CHECK(lossy.scg.tau == doctest::Approx(0.6));
}

TEST_CASE("compare_policies: duplicated policy rows are identical") {
  auto target = small_target();
  auto draft = make_perturbed_draft(target, {{2, 3}}, 0.8, 0.0, 0);
  CalibrationOptions cal;
  const auto memory = calibrate(*draft, *target, small_prompts(), cal, 6);

  CompareOptions opts;
  opts.gen.max_tokens = 24;
  opts.gen.temperature = 0.7;
  opts.base_seed = 12;
  std::vector<PolicySpec> policies{make_policy("csd"), make_policy("csd"), make_policy("sd")};
  policies[1].name = "csd-copy";
  const auto rows =
      compare_policies(*draft, *target, small_prompts(), policies, memory, opts);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].metrics.emitted_tokens == rows[1].metrics.emitted_tokens);
  CHECK(rows[0].metrics.accepted == rows[1].metrics.accepted);
  CHECK(rows[0].metrics.rescued == rows[1].metrics.rescued);
  CHECK(rows[0].speedup == rows[1].speedup);
  CHECK(rows[0].final_memory == rows[1].final_memory);
}

TEST_CASE("compare_policies: vanilla row exists with unit speedup") {
  auto target = small_target();
  CompareOptions opts;
  opts.gen.max_tokens = 10;
  const auto rows = compare_policies(*target, *target, small_prompts(),
                                     {make_policy("vanilla")}, CorrectionMemory(6), opts);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].speedup == doctest::Approx(1.0));
  CHECK(rows[0].metrics.emitted_tokens > 0);
}

TEST_CASE("compare_policies: parallel execution matches serial") {
  auto target = small_target();
  auto draft = make_perturbed_draft(target, {{2, 3}}, 0.8, 0.0, 0);
  CalibrationOptions cal;
  const auto memory = calibrate(*draft, *target, small_prompts(), cal, 6);

  CompareOptions serial, parallel;
  serial.gen.max_tokens = parallel.gen.max_tokens = 20;
  serial.gen.temperature = parallel.gen.temperature = 0.7;
  parallel.parallel_policies = true;
  const std::vector<PolicySpec> policies{make_policy("sd"), make_policy("csd"),
                                         make_policy("lossy")};
  const auto a = compare_policies(*draft, *target, small_prompts(), policies, memory, serial);
  const auto b = compare_policies(*draft, *target, small_prompts(), policies, memory, parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].metrics.emitted_tokens == b[i].metrics.emitted_tokens);
    CHECK(a[i].metrics.rescued == b[i].metrics.rescued);
    CHECK(a[i].final_memory == b[i].final_memory);
  }
}

TEST_CASE("sweep: tau points reuse the base policy with only tau changed") {
  auto target = small_target();
  auto draft = make_perturbed_draft(target, {{2, 3}}, 0.8, 0.0, 0);
  CalibrationOptions cal;
  const auto memory = calibrate(*draft, *target, small_prompts(), cal, 2);

  CompareOptions opts;
  opts.gen.max_tokens = 16;
  opts.gen.temperature = 0.7;
  PolicySpec base = make_policy("csd", -1.0, 2);
  const auto points = sweep(*draft, *target, small_prompts(), base, SweepParam::kTau,
                            {1e-4, 0.5}, memory, {}, opts);
  REQUIRE(points.size() == 2);
  CHECK(points[0].result.policy.tau == doctest::Approx(1e-4));
  CHECK(points[1].result.policy.tau == doctest::Approx(0.5));
  // looser tau (smaller) can only rescue at least as often
  CHECK(points[0].result.metrics.rescued >= points[1].result.metrics.rescued);
}

TEST_CASE("sweep: lambda points rebuild the memory under the new threshold") {
  auto target = small_target();
  auto draft = make_perturbed_draft(target, {{2, 3}}, 0.8, 0.0, 0);
  CalibrationOptions cal;
  const auto memory = calibrate(*draft, *target, small_prompts(), cal, 6);

  CompareOptions opts;
  opts.gen.max_tokens = 16;
  opts.gen.temperature = 0.7;
  const auto points = sweep(*draft, *target, small_prompts(), make_policy("ocm-only"),
                            SweepParam::kLambda, {1.0, 50.0}, memory, {}, opts);
  REQUIRE(points.size() == 2);
  CHECK(points[0].result.policy.lambda == 1);
  CHECK(points[1].result.policy.lambda == 50);
  CHECK(points[0].result.metrics.rescued >= points[1].result.metrics.rescued);
}
