#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "wlac/core.hpp"
#include "wlac/ledger.hpp"
#include "wlac/rng.hpp"

using namespace wlac;

TEST(RandomSource, SplitIsReproducible) {
  const RandomSource root(7);
  RandomSource a = root.split("trial-0");
  RandomSource b = root.split("trial-0");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(RandomSource, DifferentTagsDiverge) {
  const RandomSource root(7);
  RandomSource a = root.split("trial-0");
  RandomSource b = root.split("trial-1");
  int differ = 0;
  for (int i = 0; i < 100; ++i) differ += a.uniform() != b.uniform();
  EXPECT_GE(differ, 1);
}

TEST(RandomSource, SplitIgnoresParentDraws) {
  RandomSource root(7);
  RandomSource before = root.split("x", 3);
  for (int i = 0; i < 10; ++i) root.uniform();
  RandomSource after = root.split("x", 3);
  EXPECT_EQ(before.seed(), after.seed());
  EXPECT_NE(root.split("x", 3).seed(), root.split("x", 4).seed());
}

TEST(RandomSource, UniformMeanSanity) {
  RandomSource r = RandomSource(7).split("a");
  double s = 0.0;
  for (int i = 0; i < 1000; ++i) s += r.uniform();
  EXPECT_GE(s / 1000.0, 0.45);
  EXPECT_LE(s / 1000.0, 0.55);
}

TEST(Ledger, MergeEmpty) {
  EXPECT_TRUE(ledger_merge(QueryLedger{}, QueryLedger{}).empty());
}

TEST(Ledger, MergeAdds) {
  QueryLedger a, b;
  a.block(1).strong_phase2 = 5;
  b.block(2).strong_phase2 = 3;
  EXPECT_EQ(ledger_merge(a, b).totals().strong(), 8u);
}

TEST(Ledger, MergeRejectsOverlap) {
  QueryLedger a, b;
  a.block(1).strong_phase2 = 5;
  b.block(1).strong_phase1 = 1;
  EXPECT_THROW(ledger_merge(a, b), std::invalid_argument);
}

TEST(Ledger, TotalsAreBlockSums) {
  QueryLedger l;
  std::uint64_t strong = 0, unl = 0;
  for (int m = 1; m <= 6; ++m) {
    auto& c = l.block(m);
    c.strong_phase1 = m;
    c.strong_phase2 = 2 * m;
    c.unlabeled_phase1 = 3 * m;
    c.unlabeled_phase2 = 4 * m;
    c.weak = 5 * m;
    strong += 3 * m;
    unl += 7 * m;
  }
  EXPECT_EQ(l.totals().strong(), strong);
  EXPECT_EQ(l.totals().unlabeled(), unl);
  EXPECT_NO_THROW(l.check());
  l.block(7).strong_phase2 = 2;
  l.block(7).unlabeled_phase2 = 1;
  EXPECT_THROW(l.check(), std::logic_error);
}

TEST(CollectedExample, Trichotomy) {
  const auto q = CollectedExample::queried(Point{0.3}, 1, 0, 0.25);
  EXPECT_DOUBLE_EQ(q.weight(), 4.0);
  EXPECT_TRUE(q.in_region());

  const auto o = CollectedExample::out_of_region(Point{0.3}, 0);
  EXPECT_EQ(o.weight(), 1.0);
  EXPECT_EQ(o.y(), 0);
  EXPECT_EQ(o.weak(), 0);
  EXPECT_FALSE(o.in_region());

  const auto u = CollectedExample::unqueried(Point{0.3}, 0);
  EXPECT_EQ(u.weight(), 0.0);
  EXPECT_EQ(u.y(), 1);
  EXPECT_EQ(u.weak(), 0);
  EXPECT_TRUE(u.in_region());
}

TEST(CollectedExample, WeightCappedByGlobalFloor) {
  const auto q = CollectedExample::queried(Point{0.0}, 1, 1, 1e-9);
  EXPECT_DOUBLE_EQ(q.weight(), 1.0 / kGlobalPMin);
  EXPECT_THROW(CollectedExample::queried(Point{0.0}, 1, 1, 0.0), std::logic_error);
  EXPECT_THROW(CollectedExample::queried(Point{0.0}, 1, 1, 1.5), std::logic_error);
}

TEST(CollectedExample, WeightsInAllowedSetOverRandomProbabilities) {
  RandomSource r(11);
  for (int i = 0; i < 1000; ++i) {
    const double p = r.uniform(1e-7, 1.0);
    const double w = CollectedExample::queried(Point{r.uniform()}, 0, 1, p).weight();
    EXPECT_GE(w, 1.0);
    EXPECT_LE(w, 1.0 / kGlobalPMin);
  }
}

TEST(Point, RejectsNonFinite) {
  EXPECT_THROW(Point({std::numeric_limits<double>::quiet_NaN()}), std::invalid_argument);
  EXPECT_THROW(Point({std::numeric_limits<double>::infinity()}), std::invalid_argument);
  EXPECT_EQ(Point({1.0, 2.0}).dim(), 2u);
}

TEST(ConfigError, NamesField) {
  const ConfigError e("delta", "must lie in (0, 1)");
  EXPECT_EQ(e.field(), "delta");
  EXPECT_NE(std::string(e.what()).find("delta"), std::string::npos);
}
