#include <doctest.h>

#include <confmask/errors.hpp>
#include <confmask/inner_sets.hpp>
#include <confmask/rng.hpp>

#include <limits>
#include <vector>

#include "test_support.hpp"

using namespace confmask;
using testsupport::random_mask;
using testsupport::random_scores;

TEST_CASE("family names round-trip") {
  CHECK(family_name(Family::threshold) == "threshold");
  CHECK(family_name(Family::erosion) == "erosion");
  CHECK(family_from_name("threshold") == Family::threshold);
  CHECK(family_from_name("erosion") == Family::erosion);
  CHECK_THROWS_AS(family_from_name("banana"), ConfigError);
}

TEST_CASE("shrink levels order within a family") {
  auto a = ShrinkLevel::threshold_level(0.5);
  auto b = ShrinkLevel::threshold_level(0.8);
  auto top = ShrinkLevel::threshold_above_max();
  CHECK(a < b);
  CHECK(b < top);
  CHECK(top == ShrinkLevel::threshold_above_max());
  CHECK(ShrinkLevel::compare(top, a) > 0);

  auto e0 = ShrinkLevel::erosion_steps(0);
  auto e3 = ShrinkLevel::erosion_steps(3);
  CHECK(e0 < e3);
  CHECK(e3 <= ShrinkLevel::erosion_cap());

  CHECK_THROWS_AS(ShrinkLevel::compare(a, e0), InvariantError);
}

TEST_CASE("threshold levels are confined to the upper half") {
  CHECK_THROWS_AS(ShrinkLevel::threshold_level(0.4999), ConfigError);
  CHECK_THROWS_AS(ShrinkLevel::threshold_level(1.0001), ConfigError);
  CHECK_THROWS_AS(ShrinkLevel::threshold_level(std::numeric_limits<double>::quiet_NaN()),
                  ConfigError);
  CHECK(ShrinkLevel::threshold_level(0.5).level() == 0.5);
  CHECK(ShrinkLevel::threshold_level(1.0).level() == 1.0);
}

TEST_CASE("base level reproduces the prediction") {
  SplitMix64 rng(21);
  ScoreMap scores = random_scores(14, 19, rng);
  InnerFamily thr = InnerFamily::thresholding(scores);
  CHECK(thr.inner_mask(ShrinkLevel::threshold_level(0.5)) == thr.prediction());

  InnerFamily ero = InnerFamily::erosion(random_mask(14, 19, 0.6, rng), cross4());
  CHECK(ero.inner_mask(ShrinkLevel::erosion_steps(0)) == ero.prediction());
}

TEST_CASE("above-max level yields the empty mask") {
  SplitMix64 rng(22);
  InnerFamily thr = InnerFamily::thresholding(random_scores(8, 8, rng));
  CHECK(thr.inner_mask(ShrinkLevel::threshold_above_max()).none());
}

TEST_CASE("mismatched level families are rejected") {
  SplitMix64 rng(23);
  InnerFamily thr = InnerFamily::thresholding(random_scores(4, 4, rng));
  CHECK_THROWS_AS(thr.inner_mask(ShrinkLevel::erosion_steps(1)), InvariantError);
}

TEST_CASE("threshold breakpoints enumerate the distinct prediction scores") {
  // Scores below 0.5 are outside the prediction and contribute nothing.
  ScoreMap s(1, 5, {0.6f, 0.6f, 0.8f, 0.3f, 0.1f});
  InnerFamily fam = InnerFamily::thresholding(s);
  auto bps = fam.breakpoints();

  REQUIRE(bps.size() == 5);
  CHECK(bps[0].level() == 0.5);
  CHECK(bps[1].level() == static_cast<double>(0.6f));
  CHECK(bps[2].level() == static_cast<double>(0.8f));
  CHECK(bps[3].level() == 1.0);
  CHECK(bps[4].is_above_max());
}

TEST_CASE("erosion breakpoints stop at the first empty depth") {
  BinaryMask block(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) block.set(i, j, true);

  auto bps = InnerFamily::erosion(block, cross4()).breakpoints();
  REQUIRE(bps.size() == 3);
  CHECK(bps[0].steps() == 0);
  CHECK(bps[1].steps() == 1);
  CHECK(bps[2].steps() == 2);

  // Empty prediction: only the base level.
  auto empty_bps = InnerFamily::erosion(BinaryMask(3, 3), cross4()).breakpoints();
  REQUIRE(empty_bps.size() == 1);
  CHECK(empty_bps[0].steps() == 0);

  // Identity element never shrinks; the list stops at the fixpoint.
  BinaryMask dot(4, 4);
  dot.set(1, 1, true);
  auto fix_bps = InnerFamily::erosion(dot, StructuringElement({{0, 0}})).breakpoints();
  REQUIRE(fix_bps.size() == 1);
  CHECK(fix_bps[0].steps() == 0);
}

TEST_CASE("erosion depth is capped by the grid diameter") {
  BinaryMask tall(40, 3);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 3; ++j) tall.set(i, j, true);
  auto bps = InnerFamily::erosion(tall, cross4()).breakpoints();
  CHECK(bps.size() <= 41);
  CHECK(bps.back().steps() <= 40);
}

TEST_CASE("inner masks are nested along the breakpoints") {
  SplitMix64 rng(24);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t h = 4 + rng.next_below(28);
    const std::size_t w = 4 + rng.next_below(28);

    InnerFamily fam = (trial % 2 == 0)
                          ? InnerFamily::thresholding(random_scores(h, w, rng, trial % 4 == 0))
                          : InnerFamily::erosion(random_mask(h, w, 0.65, rng),
                                                 trial % 4 == 1 ? cross4() : square8());
    auto bps = fam.breakpoints();
    BinaryMask prev = fam.inner_mask(bps[0]);
    CHECK(prev == fam.prediction());
    for (std::size_t t = 1; t < bps.size(); ++t) {
      CHECK(bps[t - 1] < bps[t]);
      BinaryMask cur = fam.inner_mask(bps[t]);
      CHECK(cur.is_subset_of(prev));
      prev = cur;
    }
  }
}

TEST_CASE("levels between breakpoints resolve to the next breakpoint's mask") {
  SplitMix64 rng(25);
  ScoreMap scores = random_scores(10, 10, rng, true);
  InnerFamily fam = InnerFamily::thresholding(scores);
  auto bps = fam.breakpoints();
  for (std::size_t t = 1; t + 1 < bps.size(); ++t) {
    if (bps[t].is_above_max() || bps[t - 1].is_above_max()) continue;
    const double mid = (bps[t - 1].level() + bps[t].level()) / 2.0;
    if (mid <= bps[t - 1].level() || mid >= bps[t].level()) continue;
    CHECK(fam.inner_mask(ShrinkLevel::threshold_level(mid)) == fam.inner_mask(bps[t]));
  }
}
