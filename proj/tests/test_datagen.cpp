#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "wlac/datagen.hpp"
#include "wlac/hypothesis.hpp"

using namespace wlac;

namespace {

std::string write_file(const std::string& name, const std::string& body) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(ThresholdTask, NoiselessLabelsFollowCut) {
  const ThresholdTask t(0.3, 0.0);
  RandomSource r(1);
  for (int i = 0; i < 10000; ++i) {
    const Sample s = t.draw(r);
    ASSERT_EQ(s.y, s.x[0] > 0.3 ? 1 : 0);
  }
}

TEST(ThresholdTask, FlipFrequency) {
  const ThresholdTask t(0.5, 0.05);
  RandomSource r(2);
  int flips = 0;
  for (int i = 0; i < 100000; ++i) {
    const Sample s = t.draw(r);
    flips += s.y != (s.x[0] > 0.5 ? 1 : 0);
  }
  EXPECT_NEAR(flips / 1e5, 0.05, 0.007);
}

TEST(ThresholdTask, ClosedFormRisk) {
  const ThresholdTask t(0.5, 0.05);
  const ThresholdGrid g(0.3, 0.5, 2);  // cuts .3 and .5
  EXPECT_NEAR(t.true_risk(g, 1), 0.05, 1e-12);
  EXPECT_NEAR(t.true_risk(g, 0), 0.05 + 0.9 * 0.2, 1e-12);
  EXPECT_NEAR(t.true_risk(g, 0), 0.23, 1e-12);
  EXPECT_EQ(t.best_hypothesis(g), 1u);
  EXPECT_EQ(t.bayes_risk(), 0.05);
}

TEST(ThresholdTask, ClosedFormMatchesMonteCarlo) {
  const ThresholdTask t(0.42, 0.1);
  const ThresholdGrid g(0.0, 1.0, 11);
  RandomSource r(3);
  std::vector<int> miss(g.size(), 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const Sample s = t.draw(r);
    for (HypothesisId h = 0; h < g.size(); ++h) miss[h] += g.predict(h, s.x) != s.y;
  }
  const auto risks = t.true_risks(g);
  for (HypothesisId h = 0; h < g.size(); ++h) EXPECT_NEAR(miss[h] / static_cast<double>(draws), risks[h], 0.006);
}

TEST(HardExample, InformativeFrequencyAndRisks) {
  const HardExampleTask t(0.1, 64, 1);
  const auto table = t.hypotheses();
  ASSERT_EQ(table->size(), 64u);
  RandomSource r(4);
  int informative = 0;
  const int draws = 100000;
  std::vector<int> miss(table->size(), 0);
  for (int i = 0; i < draws; ++i) {
    const Sample s = t.draw(r);
    informative += t.informative(s.x);
    for (HypothesisId h = 0; h < table->size(); ++h) miss[h] += table->predict(h, s.x) != s.y;
  }
  EXPECT_NEAR(informative / static_cast<double>(draws), 0.1, 0.01);
  for (HypothesisId h = 0; h < table->size(); ++h) {
    const double emp = miss[h] / static_cast<double>(draws);
    EXPECT_NEAR(emp, h == t.h_star() ? 0.45 : 0.5, 0.01) << "h=" << h;
  }
  const auto risks = t.true_risks(*table);
  for (HypothesisId h = 0; h < table->size(); ++h) EXPECT_NEAR(risks[h], h == t.h_star() ? 0.45 : 0.5, 1e-12);
  EXPECT_EQ(t.best_hypothesis(*table), t.h_star());
}

TEST(HardExample, AtomProbabilitiesSumToOne) {
  const HardExampleTask t(0.2, 16, 3);
  double s = 0.0;
  for (std::size_t a = 0; a < t.num_atoms(); ++a) s += t.atom_probability(a);
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Blobs, BayesRiskMatchesMonteCarlo) {
  const BlobsTask t(3, 2, 0.6);
  RandomSource r(5);
  int miss = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const Sample s = t.draw(r);
    miss += t.bayes_label(s.x) != s.y;
  }
  EXPECT_NEAR(miss / static_cast<double>(draws), t.bayes_risk(), 0.01);
}

TEST(Blobs, LabelProbsAreADistribution) {
  const BlobsTask t(4, 3, 1.0);
  RandomSource r(6);
  for (int i = 0; i < 100; ++i) {
    const auto p = t.label_probs(t.draw(r).x);
    double s = 0.0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Blobs, BoundaryDistanceZeroOnBisector) {
  const BlobsTask t(2, 2, 1.0);
  // two means on the unit circle at angles 0 and pi; the bisector is x = 0
  EXPECT_NEAR(t.boundary_distance(Point{0.0, 0.3}), 0.0, 1e-12);
  EXPECT_NEAR(t.boundary_distance(Point{0.25, 0.3}), 0.25, 1e-12);
}

TEST(Replay, HandFileReplaysInOrder) {
  const auto path = write_file("replay4.csv", "f0,y,ywl\n0.1,0,0\n0.2,1,0\n0.3,1,1\n0.4,0,1\n");
  const auto task = load_csv_stream(path);
  EXPECT_TRUE(task->has_weak());
  EXPECT_EQ(task->num_classes(), 2u);
  auto stream = make_stream(task);
  RandomSource r(1);
  const double xs[] = {0.1, 0.2, 0.3, 0.4};
  const Label ys[] = {0, 1, 1, 0}, ws[] = {0, 0, 1, 1};
  for (int i = 0; i < 4; ++i) {
    const Sample s = stream->next(r);
    EXPECT_EQ(s.x[0], xs[i]);
    EXPECT_EQ(s.y, ys[i]);
    EXPECT_EQ(*s.recorded_weak, ws[i]);
  }
  EXPECT_THROW(stream->next(r), StreamExhausted);
  std::remove(path.c_str());
}

TEST(Replay, ShuffleIsAPermutation) {
  const auto path = write_file("replay_shuffle.csv", "f0,y\n0.1,0\n0.2,1\n0.3,1\n0.4,0\n0.5,1\n");
  const auto task = load_csv_stream(path);
  EXPECT_FALSE(task->has_weak());
  auto a = make_stream(task, 9), b = make_stream(task, 9);
  RandomSource r(1);
  std::vector<double> seen;
  for (int i = 0; i < 5; ++i) {
    const double x = a->next(r).x[0];
    EXPECT_EQ(b->next(r).x[0], x);
    seen.push_back(x);
  }
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(seen, (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}));
  std::remove(path.c_str());
}

TEST(Replay, MalformedRowsNameTheLine) {
  const auto path = write_file("replay_bad.csv", "f0,y\n0.1,0\n0.2,x\n");
  try {
    load_csv_stream(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
  const auto range = write_file("replay_range.csv", "f0,y\n0.1,0\n0.2,5\n");
  EXPECT_THROW(load_csv_stream(range, 2), Error);
  std::remove(path.c_str());
  std::remove(range.c_str());
}

TEST(SyntheticStream, CountsConsumption) {
  SyntheticStream s(std::make_shared<ThresholdTask>(0.5, 0.0));
  RandomSource r(1);
  for (int i = 0; i < 7; ++i) s.next(r);
  EXPECT_EQ(s.consumed(), 7u);
}
