#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wlac/datagen.hpp"
#include "wlac/estimators.hpp"
#include "wlac/hypothesis.hpp"
#include "wlac/ledger.hpp"
#include "wlac/model.hpp"
#include "wlac/opsolver.hpp"
#include "wlac/weaklabel.hpp"
#include "wlac/wleval.hpp"

namespace wlac {

enum class ScheduleKind { kDoubling, kLinear };

struct BlockSchedule {
  ScheduleKind kind = ScheduleKind::kDoubling;
  std::vector<std::size_t> lengths;

  std::size_t M() const noexcept { return lengths.size(); }
  std::size_t total() const;
};

/// Doubling: L1, L1, 2 L1, 4 L1, ... with the last block truncated so the
/// lengths sum to n. Linear: blocks of L1 (last one truncated).
BlockSchedule make_schedule(ScheduleKind kind, std::size_t L1, std::size_t n);

/// One row per executed block.
struct MetricRow {
  std::uint64_t seed = 0;
  int m = 0;
  std::size_t L_m = 0;
  BlockCounts counts;
  bool use_wl = false;
  double wlerr_dot = 1.0;
  std::string stop_reason = "none";
  double dis_mass = 0.0;
  double p_min = 0.0;
  double N_m = 0.0;
  double err_best = 0.0;  // err(h_{m+1}) on the data collected so far
  double delta = 0.0;
  double eps = 0.0;
  double phi = 0.0;
  double excess_risk = 0.0;  // theoretical engines
  double test_accuracy = 0.0;  // practical engine
  std::size_t active_size = 0;
  bool h_star_active = true;  // h* in A_m at the start of the block
  double mean_query_prob = 0.0;
  std::size_t eval_set_size = 0;
  bool phase1_budget_exceeded = false;
  std::size_t solver_iterations = 0;
  double solver_max_violation = 0.0;
  bool solver_fallback = false;
  bool solver_infeasible = false;
  double floor_slack = 0.0;  // min constraint slack of the all-p_min plan
  double kappa = 1.0;
};

struct AuditEntry {
  int m = 0;
  bool use_wl = false;
  EstimatorMode mode = EstimatorMode::kNowl;
};

struct RunResult {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::optional<HypothesisId> final_hypothesis;
  double final_excess_risk = 0.0;
  double final_accuracy = 0.0;
  QueryLedger ledger;
  std::vector<MetricRow> rows;
  std::vector<AuditEntry> audit;
  std::uint64_t oracle_strong_calls = 0;
  std::uint64_t oracle_weak_calls = 0;
  bool stream_exhausted = false;
  std::vector<std::string> warnings;

  bool h_star_always_active() const;
};

struct TheoreticalConfig {
  BlockSchedule schedule;
  ScheduleConstants constants;
  double delta = 0.1;
  std::size_t planning_pool_min = 1000;
  bool factor_two = true;
  std::optional<double> kappa_override;
  std::optional<std::uint64_t> shuffle_seed;
};

/// The full three-phase loop. With `weak == nullptr` this is the NOWL-AC
/// baseline (Phase 1 skipped, IW estimator throughout).
RunResult run_wlac_theoretical(std::shared_ptr<const Task> task, std::shared_ptr<const HypothesisClass> cls,
                               const WeakLabeler* weak, const TheoreticalConfig& cfg, std::uint64_t seed);

RunResult run_nowl_ac(std::shared_ptr<const Task> task, std::shared_ptr<const HypothesisClass> cls,
                      const TheoreticalConfig& cfg, std::uint64_t seed);

/// Queries every stream point; ERM at the schedule's block boundaries.
RunResult run_passive(std::shared_ptr<const Task> task, std::shared_ptr<const HypothesisClass> cls,
                      const BlockSchedule& schedule, std::uint64_t seed,
                      std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// Phase 2 of one block. `weak_rng` feeds the weak labeler only, so the
/// query decisions do not depend on whether weak labels are requested.
std::vector<CollectedExample> collect_phase2(const QueryPlan& plan, const RegionTest& in_region,
                                             const HypothesisClass& cls, HypothesisId h_m, Stream& stream,
                                             Labelers& labelers, std::size_t L_m, bool want_weak,
                                             RandomSource& rng, RandomSource& weak_rng, BlockCounts& counts);

enum class BaseAlKind { kEntropyThreshold, kUniform };

struct BaseAlSpec {
  BaseAlKind kind = BaseAlKind::kEntropyThreshold;
  double threshold = 0.0;
  std::size_t budget = 0;  // uniform
};

/// Membership of each batch point in the selected subset. A missing model
/// selects the whole batch.
std::vector<bool> base_al_select(const BaseAlSpec& spec, const LinearSoftmaxModel* model,
                                 std::span<const Point> batch, RandomSource& rng);

struct PracticalConfig {
  BlockSchedule schedule;
  BaseAlSpec base_al;
  TrainOptions train;
  double val_fraction = 0.01;
  std::size_t L_plus = 20;
  double p_min = 0.05;
  bool factor_two = true;
  std::size_t test_size = 5000;
};

/// Batched practical variant with a linear softmax model.
RunResult run_wlac_practical(std::shared_ptr<const Task> task, const WeakLabeler* weak, const PracticalConfig& cfg,
                             std::uint64_t seed);

/// Passive learner for the practical setting: queries the first `budget`
/// stream points and trains the same model on them.
RunResult run_passive_practical(std::shared_ptr<const Task> task, std::size_t budget, const PracticalConfig& cfg,
                                std::uint64_t seed);

}  // namespace wlac
