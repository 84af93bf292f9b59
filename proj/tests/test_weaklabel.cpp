#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <memory>

#include "wlac/datagen.hpp"
#include "wlac/weaklabel.hpp"

using namespace wlac;

namespace {

Sample at(double x, Label y) { return Sample{Point{x}, y, std::nullopt}; }

std::vector<Point> grid(int count) {
  std::vector<Point> pts;
  for (int i = 0; i < count; ++i) pts.push_back(Point{(i + 0.5) / count});
  return pts;
}

}  // namespace

TEST(NoisyAnnotator, ZeroNoiseIsExact) {
  const NoisyAnnotator na(0.0, 2);
  RandomSource r(1);
  for (int i = 0; i < 1000; ++i) {
    const Label y = static_cast<Label>(i % 2);
    EXPECT_EQ(na.draw(at(0.5, y), r), y);
  }
}

TEST(NoisyAnnotator, FullNoiseFlipsBinary) {
  const NoisyAnnotator na(1.0, 2);
  RandomSource r(1);
  for (int i = 0; i < 1000; ++i) {
    const Label y = static_cast<Label>(i % 2);
    EXPECT_EQ(na.draw(at(0.5, y), r), 1 - y);
  }
}

TEST(NoisyAnnotator, HalfNoiseFrequency) {
  const NoisyAnnotator na(0.5, 2);
  RandomSource r(2);
  int flips = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) flips += na.draw(at(0.5, 1), r) != 1;
  EXPECT_NEAR(flips / static_cast<double>(draws), 0.5, 0.01);
}

TEST(NoisyAnnotator, MulticlassFlipsToOtherClassesUniformly) {
  const NoisyAnnotator na(1.0, 3);
  RandomSource r(3);
  std::array<int, 3> hist{};
  for (int i = 0; i < 30000; ++i) ++hist[static_cast<std::size_t>(na.draw(at(0.5, 1), r))];
  EXPECT_EQ(hist[1], 0);
  EXPECT_NEAR(hist[0] / 30000.0, 0.5, 0.02);
  EXPECT_NEAR(hist[2] / 30000.0, 0.5, 0.02);
}

TEST(NoisyAnnotator, RejectsBadParameters) {
  EXPECT_THROW(NoisyAnnotator(-0.1, 2), ConfigError);
  EXPECT_THROW(NoisyAnnotator(1.1, 2), ConfigError);
  EXPECT_THROW(NoisyAnnotator(0.1, 1), ConfigError);
}

TEST(Kappa, ConstantNoiseIsOne) {
  const NoisyAnnotator na(0.3, 2);
  const auto pts = grid(100);
  const auto rep = kappa_of_region(na, [](const Point& x) { return x[0] > 0.2 && x[0] < 0.7; }, pts);
  EXPECT_EQ(rep.kappa, 1.0);
  EXPECT_EQ(rep.max_cond_err, 0.3);
  EXPECT_EQ(true_wlerr(na, [](const Point&) { return true; }, pts), 0.3);
}

TEST(Kappa, LocalizedInsideBand) {
  const auto task = std::make_shared<ThresholdTask>(0.5, 0.0);
  const LocalizedLabeler lc(task, 0.1, 0.4);
  const auto pts = grid(100);
  const RegionTest inside = [](const Point& x) { return std::abs(x[0] - 0.5) < 0.05; };
  const auto rep = kappa_of_region(lc, inside, pts);
  EXPECT_EQ(rep.kappa, 1.0);
  EXPECT_EQ(rep.max_cond_err, 0.0);
  EXPECT_EQ(true_wlerr(lc, inside, pts), 0.0);
}

TEST(Kappa, LocalizedStraddlingBandIsInfinite) {
  const auto task = std::make_shared<ThresholdTask>(0.5, 0.0);
  const LocalizedLabeler lc(task, 0.1, 0.4);
  const auto pts = grid(100);
  const auto rep = kappa_of_region(lc, [](const Point& x) { return std::abs(x[0] - 0.5) < 0.3; }, pts);
  EXPECT_FALSE(rep.finite());
  EXPECT_EQ(rep.kappa, kInfiniteKappa);
  EXPECT_EQ(rep.max_cond_err, 0.4);
  EXPECT_EQ(rep.min_cond_err, 0.0);
}

TEST(Kappa, EmptyRegionThrows) {
  const NoisyAnnotator na(0.3, 2);
  const auto pts = grid(10);
  EXPECT_THROW(kappa_of_region(na, [](const Point&) { return false; }, pts), std::invalid_argument);
}

TEST(LocalizedLabeler, EmpiricalErrorMatchesConditionalError) {
  const auto task = std::make_shared<ThresholdTask>(0.5, 0.0);
  const LocalizedLabeler lc(task, 0.1, 0.3);
  RandomSource r(4);
  int near_wrong = 0, far_wrong = 0;
  for (int i = 0; i < 20000; ++i) {
    near_wrong += lc.draw(at(0.55, 1), r) != 1;
    far_wrong += lc.draw(at(0.9, 1), r) != 1;
  }
  EXPECT_EQ(near_wrong, 0);
  EXPECT_NEAR(far_wrong / 20000.0, 0.3, 0.015);
}

TEST(BiasedHypothesis, PerfectWhenMatchingBestOnNoiselessTask) {
  const auto task = std::make_shared<ThresholdTask>(0.5, 0.0);
  const auto aux = std::make_shared<ThresholdGrid>(0.0, 1.0, 11);
  const HypothesisId g = task->best_hypothesis(*aux);
  EXPECT_DOUBLE_EQ(aux->cut(g), 0.5);
  const BiasedHypothesisLabeler b(task, aux, g);
  const auto pts = grid(200);
  EXPECT_EQ(true_wlerr(b, [](const Point&) { return true; }, pts), 0.0);
  RandomSource r(5);
  for (const auto& p : pts) EXPECT_EQ(b.draw(Sample{p, p[0] > 0.5 ? 1 : 0, std::nullopt}, r), p[0] > 0.5 ? 1 : 0);
}

TEST(BiasedHypothesis, ErrorOnMismatchedInterval) {
  const auto task = std::make_shared<ThresholdTask>(0.5, 0.1);
  const auto aux = std::make_shared<ThresholdGrid>(0.0, 1.0, 11);
  const BiasedHypothesisLabeler b(task, aux, 7);  // cut 0.7
  EXPECT_NEAR(b.cond_error(Point{0.6}), 0.9, 1e-12);
  EXPECT_NEAR(b.cond_error(Point{0.8}), 0.1, 1e-12);
  EXPECT_THROW(BiasedHypothesisLabeler(task, aux, 11), ConfigError);
}

TEST(RecordedLabeler, ReplaysColumnAndIsOpaque) {
  const RecordedLabeler rec;
  RandomSource r(1);
  EXPECT_EQ(rec.draw(Sample{Point{0.1}, 0, Label{1}}, r), 1);
  EXPECT_THROW(rec.draw(at(0.1, 0), r), Error);
  EXPECT_FALSE(rec.introspectable());
  EXPECT_THROW(rec.cond_error(Point{0.1}), Error);
}

TEST(Labelers, CountCalls) {
  const NoisyAnnotator na(0.0, 2);
  Labelers l(&na);
  RandomSource r(1);
  l.strong(at(0.3, 1));
  l.weak(at(0.3, 1), r);
  l.weak(at(0.3, 1), r);
  EXPECT_EQ(l.strong_calls(), 1u);
  EXPECT_EQ(l.weak_calls(), 2u);
  Labelers none(nullptr);
  EXPECT_THROW(none.weak(at(0.3, 1), r), Error);
}
