#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "specdec/distributions.hpp"
#include "specdec/errors.hpp"
#include "specdec/rng.hpp"
#include "specdec/types.hpp"

using namespace specdec;

TEST_CASE("softmax: symmetric logits split evenly") {
  const ProbDist p = softmax_with_temperature(Logits{{0.0, 0.0}}, 1.0);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax: [ln 2, 0] at T=1 gives [2/3, 1/3]") {
  const ProbDist p = softmax_with_temperature(Logits{{std::log(2.0), 0.0}}, 1.0);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax: T=0 is exact argmax one-hot with lowest-id tie-break") {
  const ProbDist p = softmax_with_temperature(Logits{{1.0, 3.0, 3.0}}, 0.0);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 1.0);
  CHECK(p[2] == 0.0);
}

TEST_CASE("softmax: output is a valid distribution for random finite logits") {
  RngStream rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Logits z;
    const std::size_t n = 2 + (rng.next_u64() % 30);
    for (std::size_t i = 0; i < n; ++i) z.scores.push_back((rng.uniform() - 0.5) * 80.0);
    const double t = 0.05 + rng.uniform() * 3.0;
    CHECK_NOTHROW(softmax_with_temperature(z, t).validate());
  }
}

TEST_CASE("softmax: shift invariance") {
  RngStream rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Logits z, shifted;
    const double c = (rng.uniform() - 0.5) * 200.0;
    for (int i = 0; i < 8; ++i) {
      const double v = (rng.uniform() - 0.5) * 40.0;
      z.scores.push_back(v);
      shifted.scores.push_back(v + c);
    }
    const double t = 0.1 + rng.uniform() * 2.0;
    const ProbDist a = softmax_with_temperature(z, t);
    const ProbDist b = softmax_with_temperature(shifted, t);
    for (int i = 0; i < 8; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("softmax: T -> 0+ converges to the T=0 one-hot on non-tied logits") {
  const Logits z{{0.3, 2.5, -1.0, 1.9}};
  const ProbDist limit = softmax_with_temperature(z, 0.0);
  const ProbDist near = softmax_with_temperature(z, 1e-6);
  CHECK(total_variation(limit, near) < 1e-3);
}

TEST_CASE("softmax: rejects non-finite logits and negative temperature") {
  CHECK_THROWS_AS(softmax_with_temperature(Logits{{0.0, std::nan("")}}, 1.0), InvariantError);
  CHECK_THROWS_AS(softmax_with_temperature(Logits{{0.0, 1.0}}, -1.0), InvariantError);
}

TEST_CASE("sample: degenerate and one-hot distributions") {
  RngStream rng(3);
  CHECK(sample(ProbDist{{1.0, 0.0, 0.0}}, rng) == 0);
  for (TokenId k = 0; k < 4; ++k) {
    ProbDist one_hot{{0.0, 0.0, 0.0, 0.0}};
    one_hot.probs[static_cast<std::size_t>(k)] = 1.0;
    CHECK(sample(one_hot, rng) == k);
  }
}

TEST_CASE("sample: empirical frequency of a fair coin over 100k draws") {
  RngStream rng(12345);
  const ProbDist coin{{0.5, 0.5}};
  int zeros = 0;
  for (int i = 0; i < 100000; ++i) {
    if (sample(coin, rng) == 0) ++zeros;
  }
  const double freq = zeros / 100000.0;
  // binomial 99% interval around 0.5
  CHECK(freq >= 0.494);
  CHECK(freq <= 0.506);
}

TEST_CASE("sample: deterministic function of (dist, rng state)") {
  const ProbDist d{{0.2, 0.3, 0.1, 0.4}};
  RngStream a(99), b(99);
  for (int i = 0; i < 1000; ++i) CHECK(sample(d, a) == sample(d, b));
}

TEST_CASE("rng: identical seeds give identical sequences, distinct seeds differ") {
  RngStream a(42), b(42), c(43);
  bool all_equal_c = true;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    if (x != c.next_u64()) all_equal_c = false;
  }
  CHECK_FALSE(all_equal_c);
}

TEST_CASE("rng: derive_seed is stable and index-local") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 5) != derive_seed(2, 5));
}

TEST_CASE("vocabulary: file round trip, bijection, duplicate rejection") {
  const auto dir = std::filesystem::temp_directory_path() / "specdec_core_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "vocab.txt").string();

  Vocabulary vocab({"<s>", "alpha", "beta", "gamma"});
  vocab.save(path);
  const Vocabulary loaded = Vocabulary::load(path);
  REQUIRE(loaded.size() == 4);
  for (TokenId t = 0; t < 4; ++t) {
    CHECK(loaded.id_of(loaded.symbol(t)) == t);
    CHECK(loaded.symbol(t) == vocab.symbol(t));
  }
  CHECK(loaded.id_of("nope") == -1);
  CHECK_THROWS_AS(Vocabulary({"a", "a"}), ParseError);
  CHECK_THROWS_AS(Vocabulary({"only"}), ParseError);
}

TEST_CASE("probdist validation catches bad vectors") {
  const ProbDist overweight{{0.5, 0.6}};
  const ProbDist out_of_range{{-0.1, 1.1}};
  const ProbDist good{{0.25, 0.75}};
  CHECK_THROWS_AS(overweight.validate(), InvariantError);
  CHECK_THROWS_AS(out_of_range.validate(), InvariantError);
  CHECK_NOTHROW(good.validate());
}
