#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "wlac/core.hpp"
#include "wlac/estimators.hpp"
#include "wlac/hypothesis.hpp"
#include "wlac/weaklabel.hpp"

namespace wlac {

inline constexpr double kProbCeiling = 1.0 - 1e-6;

/// Groups in-region pool points into cells on which every hypothesis in the
/// class predicts identically. Cells are the unit of the query plan.
class CellIndex {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  CellIndex(std::shared_ptr<const HypothesisClass> cls, const RegionTest& in_region, std::span<const Point> pool);

  std::size_t num_cells() const noexcept { return mass_.size(); }
  std::size_t pool_size() const noexcept { return pool_cell_.size(); }
  /// Fraction of the whole pool that falls into cell c.
  double mass(std::size_t c) const { return mass_[c]; }
  const std::vector<double>& masses() const noexcept { return mass_; }
  /// Cell of pool point i, npos when the point is outside the region.
  std::size_t pool_cell(std::size_t i) const { return pool_cell_[i]; }
  /// Cell of x; points whose cell was not seen in the pool map to the nearest one.
  /// npos when there are no cells at all.
  std::size_t locate(const Point& x) const;
  /// A pool point lying in cell c.
  const Point& representative(std::size_t c) const { return reps_[c]; }
  const HypothesisClass& hypotheses() const noexcept { return *cls_; }
  bool threshold() const noexcept { return grid_ != nullptr; }
  /// Sorted cuts_below values of the cells (threshold classes only).
  const std::vector<std::size_t>& threshold_keys() const noexcept { return keys_; }

 private:
  std::shared_ptr<const HypothesisClass> cls_;
  const ThresholdGrid* grid_ = nullptr;
  std::vector<double> mass_;
  std::vector<std::size_t> pool_cell_;
  std::vector<Point> reps_;
  std::vector<std::size_t> keys_;                      // threshold
  std::map<std::vector<Label>, std::size_t> by_sig_;  // general
};

struct Run {
  std::uint32_t begin;
  std::uint32_t end;
  bool operator==(const Run&) const = default;
  auto operator<=>(const Run&) const = default;
};

/// Cells and, for each hypothesis, the runs of cells where it disagrees
/// with the incumbent. Hypotheses with identical runs share a group.
struct OpInstance {
  std::shared_ptr<const CellIndex> cells;
  HypothesisId incumbent = 0;
  std::vector<std::vector<Run>> groups;      // distinct non-empty run lists
  std::vector<std::size_t> group_of;         // per hypothesis; npos for vacuous ones
  std::vector<double> indicator_mass;        // per hypothesis: E[1(h != h_m, x in D)]
};

OpInstance build_op_instance(std::shared_ptr<const HypothesisClass> cls, HypothesisId incumbent,
                             const RegionTest& in_region, std::span<const Point> pool);

/// Right-hand sides of the query-probability program.
struct OpConstraintSpec {
  std::vector<double> indicator_mass;
  std::vector<double> regret;  // reg(h, h_m) on the data collected so far
  double tau_prev = 0.0;
  double delta_prev = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double xi = 1.0;
  double wlerr_dot = 1.0;
  bool use_wl = false;

  double b_nowl(HypothesisId h) const;
  double b_wl(HypothesisId h) const { return 0.5 * (b_nowl(h) - indicator_mass[h]); }
  double b(HypothesisId h) const { return use_wl ? b_wl(h) : b_nowl(h); }
  double factor() const { return use_wl ? wlerr_dot : 1.0; }
};

OpConstraintSpec make_constraint_spec(const OpInstance& inst, std::vector<double> regret, double tau_prev,
                                      double delta_prev, const ScheduleConstants& k);

struct SolverDiagnostics {
  std::size_t iterations = 0;
  double max_violation = 0.0;  // max over h of (LHS - b), <= 0 when feasible
  double objective = 0.0;      // sum over cells of mass / (1 - P)
  double dual_bound = 0.0;
  bool infeasible = false;
  bool used_fallback = false;
};

class QueryPlan {
 public:
  enum class Mode { kPerPoint, kScalar };

  static QueryPlan scalar(double p, double p_min);
  static QueryPlan per_cell(std::shared_ptr<const CellIndex> cells, std::vector<double> probs, double p_min);

  Mode mode() const noexcept { return mode_; }
  double p_min() const noexcept { return p_min_; }
  double scalar_value() const noexcept { return scalar_; }
  const std::vector<double>& cell_probs() const noexcept { return probs_; }
  const std::shared_ptr<const CellIndex>& cells() const noexcept { return cells_; }

  /// Query probability for an in-region point.
  double prob_at(const Point& x) const;
  /// Mass-weighted mean of P over the in-region part of the pool, divided by the pool size (E[P 1_D]).
  double expected_in_region() const;
  /// Mean probability over in-region pool points.
  double mean_in_region() const;

  SolverDiagnostics diagnostics;

 private:
  Mode mode_ = Mode::kScalar;
  double p_min_ = 0.0;
  double scalar_ = 1.0;
  std::shared_ptr<const CellIndex> cells_;
  std::vector<double> probs_;
};

struct SolverOptions {
  std::size_t max_iterations = 10000;
  double step = 1.0;
  double gap_tolerance = 1e-6;
  std::size_t check_every = 50;
};

/// LHS of the constraint for hypothesis h under the plan.
double constraint_lhs(const QueryPlan& plan, const OpInstance& inst, HypothesisId h, const OpConstraintSpec& spec);
/// b(h) - LHS(h).
double constraint_slack(const QueryPlan& plan, const OpInstance& inst, HypothesisId h, const OpConstraintSpec& spec);
double min_slack(const QueryPlan& plan, const OpInstance& inst, const OpConstraintSpec& spec);

/// Per-cell plan minimizing sum mass/(1-P) under the constraints, within
/// [p_min, kProbCeiling]. Sets diagnostics.infeasible and returns the
/// all-ceiling plan when even that violates a constraint.
QueryPlan solve_op(const OpInstance& inst, const OpConstraintSpec& spec, double p_min, const SolverOptions& opt = {});

/// clamp(4 P_nowl wlerr_dot, p_min, 1) cell by cell.
QueryPlan feasible_fallback(const QueryPlan& p_nowl, double wlerr_dot, double p_min);

/// max{wlerr_dot, p_min}.
QueryPlan solve_op_practical(double wlerr_dot, double p_min);

}  // namespace wlac
