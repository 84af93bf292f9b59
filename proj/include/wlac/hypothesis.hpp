#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wlac/core.hpp"
#include "wlac/loss.hpp"
#include "wlac/rng.hpp"

namespace wlac {

/// A finite, enumerable set of classifiers. Prediction is a pure function of
/// (id, point). Implementations are immutable and thread-safe.
class HypothesisClass {
 public:
  virtual ~HypothesisClass() = default;
  virtual std::size_t size() const = 0;
  /// Throws std::out_of_range for an unknown id.
  virtual Label predict(HypothesisId h, const Point& x) const = 0;
  virtual std::string kind() const = 0;
};

/// h_i(x) = 1[x > cut_i] with cuts evenly spaced on [lo, hi], ascending.
class ThresholdGrid final : public HypothesisClass {
 public:
  ThresholdGrid(double lo, double hi, std::size_t count);

  std::size_t size() const override { return cuts_.size(); }
  Label predict(HypothesisId h, const Point& x) const override;
  std::string kind() const override { return "threshold_grid"; }

  double cut(HypothesisId h) const { return cuts_.at(h); }
  const std::vector<double>& cuts() const noexcept { return cuts_; }
  /// Number of cuts strictly below x[0]; hypotheses with id < this predict 1.
  std::size_t cuts_below(const Point& x) const;
  /// Id of the cut closest to v (lowest id on ties).
  HypothesisId nearest(double v) const;

 private:
  std::vector<double> cuts_;
};

/// h_{a,b}(x) = 1[a < x <= b] for every pair of grid points a < b.
class IntervalGrid final : public HypothesisClass {
 public:
  IntervalGrid(double lo, double hi, std::size_t points);

  std::size_t size() const override { return bounds_.size(); }
  Label predict(HypothesisId h, const Point& x) const override;
  std::string kind() const override { return "interval_grid"; }

  std::pair<double, double> bounds(HypothesisId h) const { return bounds_.at(h); }

 private:
  std::vector<std::pair<double, double>> bounds_;
};

/// Explicit (hypothesis, point) -> label table over a finite point universe.
/// A point's id is its first feature, rounded.
class EnumeratedTable final : public HypothesisClass {
 public:
  /// labels[h][point_id]
  explicit EnumeratedTable(std::vector<std::vector<Label>> labels);

  std::size_t size() const override { return labels_.size(); }
  Label predict(HypothesisId h, const Point& x) const override;
  std::string kind() const override { return "enumerated_table"; }

  std::size_t num_points() const noexcept { return labels_.empty() ? 0 : labels_.front().size(); }
  static std::size_t point_id(const Point& x);

 private:
  std::vector<std::vector<Label>> labels_;
};

/// Reads "hypothesis_id,point_id,label" rows (header required). Every
/// (hypothesis, point) pair must appear exactly once.
std::shared_ptr<EnumeratedTable> load_enumerated_table_csv(const std::string& path);

struct ActiveSet {
  std::vector<HypothesisId> members;  // ascending
  HypothesisId incumbent = 0;

  bool contains(HypothesisId h) const;
};

ActiveSet full_active_set(const HypothesisClass& cls, HypothesisId incumbent);

/// Keeps every id whose error is within `radius` of the incumbent's.
/// Throws std::invalid_argument if the incumbent is not a minimizer.
ActiveSet build_active_set(const HypothesisClass& cls, std::span<const double> errs,
                           HypothesisId incumbent, double radius);

/// DIS(A): points where two members of the active set disagree.
class DisagreementRegion {
 public:
  DisagreementRegion(std::shared_ptr<const HypothesisClass> cls, ActiveSet active);

  bool contains(const Point& x) const;
  const ActiveSet& active() const noexcept { return active_; }
  const HypothesisClass& hypotheses() const noexcept { return *cls_; }

 private:
  std::shared_ptr<const HypothesisClass> cls_;
  ActiveSet active_;
  const ThresholdGrid* grid_ = nullptr;  // set when the O(1) threshold test applies
  double lo_cut_ = 0.0;
  double hi_cut_ = 0.0;
};

/// Fraction of the pool inside the region. Throws on an empty pool.
double disagreement_mass(const DisagreementRegion& region, std::span<const Point> pool);

/// Empirical risk minimizer under the given estimator; lowest id wins ties,
/// and empty data returns id 0.
HypothesisId erm(const HypothesisClass& cls, std::span<const CollectedExample> data,
                 EstimatorMode mode);

/// Monte Carlo estimate of sup_{r >= r0} P(DIS(B(h*, r))) / r over r = r0, 2 r0, ..., 1,
/// where B(h*, r) holds the hypotheses whose disagreement mass with h* is at most r.
double disagreement_coefficient(const HypothesisClass& cls,
                                const std::function<Point(RandomSource&)>& sampler,
                                HypothesisId h_star, double r0, std::size_t samples,
                                RandomSource& rng);

}  // namespace wlac
