#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "wlac/engine.hpp"

using namespace wlac;

namespace {

std::shared_ptr<const Task> threshold(double rho) { return std::make_shared<ThresholdTask>(0.5, rho); }
std::shared_ptr<const HypothesisClass> grid(std::size_t count) {
  return std::make_shared<ThresholdGrid>(0.0, 1.0, count);
}

TheoreticalConfig theoretical(std::size_t n, ScheduleConstants k) {
  TheoreticalConfig c;
  c.schedule = make_schedule(ScheduleKind::kDoubling, 3, n);
  c.constants = std::move(k);
  c.delta = 0.1;
  return c;
}

// Near-zero confidence radius: the error bound handed to the evaluator is tiny
// in every block, so Step 1 always declines to evaluate.
ScheduleConstants nowl_forcing() {
  ScheduleConstants k = ScheduleConstants::practical();
  k.c1 = 1e-9;
  k.c2 = 1e-9;
  return k;
}

PracticalConfig practical(std::size_t n, std::size_t block) {
  PracticalConfig c;
  c.schedule = make_schedule(ScheduleKind::kLinear, block, n);
  c.base_al.threshold = 0.3;
  c.train.epochs = 150;
  c.test_size = 1000;
  c.val_fraction = 0.05;
  return c;
}

void expect_ledger_reconciles(const RunResult& r) {
  EXPECT_NO_THROW(r.ledger.check());
  EXPECT_EQ(r.ledger.totals().strong(), r.oracle_strong_calls);
  EXPECT_EQ(r.ledger.totals().weak, r.oracle_weak_calls);
  for (const auto& a : r.audit) EXPECT_EQ(a.mode, a.use_wl ? EstimatorMode::kUseWl : EstimatorMode::kNowl);
}

}  // namespace

TEST(Schedule, DoublingExample) {
  const auto s = make_schedule(ScheduleKind::kDoubling, 3, 45);
  EXPECT_EQ(s.lengths, (std::vector<std::size_t>{3, 3, 6, 12, 21}));
  EXPECT_EQ(s.total(), 45u);
  EXPECT_EQ(s.M(), 5u);
}

TEST(Schedule, LinearExample) {
  const auto s = make_schedule(ScheduleKind::kLinear, 1000, 5000);
  EXPECT_EQ(s.lengths, std::vector<std::size_t>(5, 1000));
}

TEST(Schedule, InvariantsOverRandomSizes) {
  RandomSource r(1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t L1 = 3 + r.below(20), n = L1 + r.below(100000);
    const auto s = make_schedule(ScheduleKind::kDoubling, L1, n);
    EXPECT_EQ(s.total(), n);
    std::size_t prev = 0;
    for (std::size_t m = 0; m < s.M(); ++m) {
      if (m > 0) EXPECT_LE(s.lengths[m], prev);
      prev += s.lengths[m];
    }
  }
}

TEST(Schedule, Rejections) {
  EXPECT_THROW(make_schedule(ScheduleKind::kDoubling, 2, 100), ConfigError);
  EXPECT_THROW(make_schedule(ScheduleKind::kLinear, 10, 5), ConfigError);
}

TEST(CollectPhase2, CertainQueriesHaveUnitWeight) {
  const auto task = threshold(0.0);
  const auto g = grid(11);
  SyntheticStream s(task);
  const NoisyAnnotator na(0.0, 2);
  Labelers l(&na);
  RandomSource r(1), w(2);
  BlockCounts c;
  const auto out = collect_phase2(QueryPlan::scalar(1.0, 0.01), [](const Point&) { return true; }, *g, 5, s, l, 500,
                                  true, r, w, c);
  ASSERT_EQ(out.size(), 500u);
  for (const auto& z : out) {
    EXPECT_EQ(z.weight(), 1.0);
    EXPECT_TRUE(z.in_region());
  }
  EXPECT_EQ(c.strong_phase2, 500u);
  EXPECT_EQ(c.unlabeled_phase2, 500u);
  EXPECT_EQ(c.weak, 500u);
}

TEST(CollectPhase2, HalfPlanQueriesHalf) {
  const auto task = threshold(0.0);
  const auto g = grid(11);
  SyntheticStream s(task);
  Labelers l(nullptr);
  RandomSource r(3), w(4);
  BlockCounts c;
  const auto out = collect_phase2(QueryPlan::scalar(0.5, 0.01), [](const Point&) { return true; }, *g, 5, s, l, 10000,
                                  false, r, w, c);
  EXPECT_NEAR(static_cast<double>(c.strong_phase2) / 10000.0, 0.5, 0.015);
  EXPECT_EQ(c.weak, 0u);
  for (const auto& z : out) {
    if (z.weight() > 0) {
      EXPECT_EQ(z.weight(), 2.0);
      EXPECT_EQ(z.weak(), z.y());
    }
  }
}

TEST(CollectPhase2, EmptyRegionQueriesNothing) {
  const auto task = threshold(0.0);
  const auto g = grid(11);
  SyntheticStream s(task);
  Labelers l(nullptr);
  RandomSource r(5), w(6);
  BlockCounts c;
  const auto out = collect_phase2(QueryPlan::scalar(1.0, 0.01), [](const Point&) { return false; }, *g, 5, s, l, 300,
                                  false, r, w, c);
  EXPECT_EQ(c.strong_phase2, 0u);
  for (const auto& z : out) {
    EXPECT_EQ(z.weight(), 1.0);
    EXPECT_EQ(z.y(), g->predict(5, z.x()));
  }
}

TEST(CollectPhase2, QueryDecisionsIgnoreWeakRequests) {
  const auto task = threshold(0.1);
  const auto g = grid(11);
  const NoisyAnnotator na(0.3, 2);
  std::vector<double> xs[2];
  std::vector<bool> q[2];
  for (int want = 0; want < 2; ++want) {
    SyntheticStream s(task);
    Labelers l(&na);
    RandomSource r(7), w(8);
    BlockCounts c;
    for (const auto& z : collect_phase2(QueryPlan::scalar(0.3, 0.01), [](const Point&) { return true; }, *g, 5, s, l,
                                        2000, want == 1, r, w, c)) {
      xs[want].push_back(z.x()[0]);
      q[want].push_back(z.weight() > 0.0);
    }
  }
  EXPECT_EQ(xs[0], xs[1]);
  EXPECT_EQ(q[0], q[1]);
}

TEST(Engine, SingletonClassNeverQueries) {
  const auto task = threshold(0.1);
  const auto table = std::make_shared<EnumeratedTable>(std::vector<std::vector<Label>>{{0, 1}, {0, 1}});  // one distinct hypothesis
  const auto r = run_nowl_ac(task, table, theoretical(2000, ScheduleConstants::practical()), 1);
  EXPECT_EQ(r.ledger.totals().strong(), 0u);
  for (const auto& row : r.rows) EXPECT_EQ(row.dis_mass, 0.0);
}

TEST(Engine, NowlTrajectoryEqualsWlacWhenEvaluatorDeclines) {
  const auto task = threshold(0.1);
  const auto g = grid(128);
  const NoisyAnnotator na(0.2, 2);
  const auto cfg = theoretical(3000, nowl_forcing());
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto a = run_wlac_theoretical(task, g, &na, cfg, seed);
    const auto b = run_nowl_ac(task, g, cfg, seed);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      const auto& x = a.rows[i];
      const auto& y = b.rows[i];
      ASSERT_FALSE(x.use_wl);
      EXPECT_EQ(x.stop_reason, "step1_nowl");
      EXPECT_EQ(x.counts.strong_phase1, 0u);
      EXPECT_EQ(x.counts.strong_phase2, y.counts.strong_phase2);
      EXPECT_EQ(x.counts.unlabeled_phase2, y.counts.unlabeled_phase2);
      EXPECT_EQ(x.active_size, y.active_size);
      EXPECT_EQ(x.dis_mass, y.dis_mass);
      EXPECT_EQ(x.p_min, y.p_min);
      EXPECT_EQ(x.N_m, y.N_m);
      EXPECT_EQ(x.err_best, y.err_best);
      EXPECT_EQ(x.delta, y.delta);
      EXPECT_EQ(x.excess_risk, y.excess_risk);
      EXPECT_EQ(y.counts.weak, 0u);
    }
    EXPECT_EQ(a.final_hypothesis, b.final_hypothesis);
    expect_ledger_reconciles(a);
    expect_ledger_reconciles(b);
  }
}

TEST(Engine, SeedDeterminism) {
  const auto task = threshold(0.05);
  const auto g = grid(64);
  const NoisyAnnotator na(0.1, 2);
  const auto cfg = theoretical(4000, ScheduleConstants::practical());
  const auto a = run_wlac_theoretical(task, g, &na, cfg, 9);
  const auto b = run_wlac_theoretical(task, g, &na, cfg, 9);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].counts.strong(), b.rows[i].counts.strong());
    EXPECT_EQ(a.rows[i].counts.unlabeled(), b.rows[i].counts.unlabeled());
    EXPECT_EQ(a.rows[i].err_best, b.rows[i].err_best);
    EXPECT_EQ(a.rows[i].wlerr_dot, b.rows[i].wlerr_dot);
    EXPECT_EQ(a.rows[i].mean_query_prob, b.rows[i].mean_query_prob);
  }
  EXPECT_EQ(a.final_hypothesis, b.final_hypothesis);
  expect_ledger_reconciles(a);
}

TEST(Engine, NowlBaselineLearnsRealizableThreshold) {
  const auto task = threshold(0.0);
  const auto g = grid(512);
  const auto cfg = theoretical(20000, ScheduleConstants::practical());
  std::vector<double> risks;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = run_nowl_ac(task, g, cfg, seed);
    risks.push_back(r.final_excess_risk);
    EXPECT_TRUE(r.final_hypothesis.has_value());
    expect_ledger_reconciles(r);
  }
  std::nth_element(risks.begin(), risks.begin() + 5, risks.end());
  EXPECT_LE(risks[5], 0.02);
}

// Label noise keeps the best error away from zero; with a noiseless task the
// evaluator is never started and both variants coincide.
TEST(Engine, PerfectWeakLabelsSaveStrongQueries) {
  const auto task = threshold(0.05);
  const auto g = grid(512);
  const NoisyAnnotator na(0.0, 2);
  const auto cfg = theoretical(20000, ScheduleConstants::practical());
  std::uint64_t wl = 0, nowl = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    wl += run_wlac_theoretical(task, g, &na, cfg, seed).ledger.totals().strong();
    nowl += run_nowl_ac(task, g, cfg, seed).ledger.totals().strong();
  }
  EXPECT_LT(wl, nowl);
}

TEST(Engine, PassiveQueriesEverything) {
  const auto task = threshold(0.1);
  const auto g = grid(64);
  const auto r = run_passive(task, g, make_schedule(ScheduleKind::kDoubling, 3, 100), 1);
  EXPECT_EQ(r.ledger.totals().strong(), 100u);
  EXPECT_EQ(r.ledger.totals().unlabeled(), 100u);
  expect_ledger_reconciles(r);
}

TEST(BaseAl, Examples) {
  LinearSoftmaxModel m(3, 2);
  RandomSource r(1);
  for (double& w : m.weights()) w = r.uniform(-1.0, 1.0);
  std::vector<Point> batch;
  for (int i = 0; i < 100; ++i) batch.push_back(Point{r.uniform(-1.0, 1.0), r.uniform(-1.0, 1.0)});
  BaseAlSpec et;
  et.threshold = 0.0;
  auto all = base_al_select(et, &m, batch, r);
  EXPECT_EQ(std::count(all.begin(), all.end(), true), 100);
  et.threshold = std::log(3.0) + 1e-9;
  auto none = base_al_select(et, &m, batch, r);
  EXPECT_EQ(std::count(none.begin(), none.end(), true), 0);
  BaseAlSpec uni;
  uni.kind = BaseAlKind::kUniform;
  uni.budget = 100;
  auto u = base_al_select(uni, &m, batch, r);
  EXPECT_EQ(std::count(u.begin(), u.end(), true), 100);
  uni.budget = 30;
  u = base_al_select(uni, &m, batch, r);
  EXPECT_EQ(std::count(u.begin(), u.end(), true), 30);
  auto first = base_al_select(et, nullptr, batch, r);
  EXPECT_EQ(std::count(first.begin(), first.end(), true), 100);
}

TEST(Practical, RejectsZeroValidationFraction) {
  auto cfg = practical(2000, 500);
  cfg.val_fraction = 0.0;
  const NoisyAnnotator na(0.1, 3);
  EXPECT_THROW(run_wlac_practical(std::make_shared<BlobsTask>(3, 2, 0.5), &na, cfg, 1), ConfigError);
}

TEST(Practical, HalfNoiseAnnotatorIsDropped) {
  const auto task = std::make_shared<BlobsTask>(3, 2, 0.5);
  const NoisyAnnotator na(0.5, 3);
  const auto cfg = practical(6000, 500);
  const std::size_t third = (cfg.schedule.M() + 2) / 3;
  int dropped = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto r = run_wlac_practical(task, &na, cfg, seed);
    expect_ledger_reconciles(r);
    bool later_wl = false;
    for (const auto& row : r.rows)
      if (static_cast<std::size_t>(row.m) > third && row.use_wl) later_wl = true;
    dropped += !later_wl;
  }
  EXPECT_GE(dropped, 20);
}

TEST(Practical, SeedDeterminismAndLedger) {
  const auto task = std::make_shared<BlobsTask>(3, 2, 0.5);
  const NoisyAnnotator na(0.1, 3);
  const auto cfg = practical(3000, 500);
  const auto a = run_wlac_practical(task, &na, cfg, 4);
  const auto b = run_wlac_practical(task, &na, cfg, 4);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].counts.strong(), b.rows[i].counts.strong());
    EXPECT_EQ(a.rows[i].test_accuracy, b.rows[i].test_accuracy);
  }
  expect_ledger_reconciles(a);
  const auto p = run_passive_practical(task, 700, cfg, 4);
  EXPECT_EQ(p.ledger.totals().strong(), 700u);
  EXPECT_GT(p.final_accuracy, 0.7);
}
