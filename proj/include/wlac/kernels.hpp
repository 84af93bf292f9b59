#pragma once

// Data-parallel inner loops. Each kernel has a plain serial version kept as
// the reference for tests and benchmarks, and an OpenMP version the engine
// uses. Results agree up to floating-point summation order.

#include <span>
#include <vector>

#include "wlac/core.hpp"
#include "wlac/hypothesis.hpp"

namespace wlac::kernels {

/// Running per-hypothesis loss sums under both estimators.
struct LossSums {
  std::vector<double> dr;
  std::vector<double> iw;
  std::size_t count = 0;

  explicit LossSums(std::size_t num_hypotheses = 0) : dr(num_hypotheses, 0.0), iw(num_hypotheses, 0.0) {}

  const std::vector<double>& sums(EstimatorMode mode) const {
    return mode == EstimatorMode::kUseWl ? dr : iw;
  }
  /// Per-example means; all zeros when nothing has been accumulated.
  std::vector<double> means(EstimatorMode mode) const;
};

void accumulate_losses_serial(const HypothesisClass& cls, std::span<const CollectedExample> batch,
                              LossSums& sums);
void accumulate_losses_parallel(const HypothesisClass& cls, std::span<const CollectedExample> batch,
                                LossSums& sums);
/// Difference-array sweep for threshold grids: O(|batch| log|H| + |H|).
void accumulate_losses_threshold(const ThresholdGrid& grid, std::span<const CollectedExample> batch,
                                 LossSums& sums);
/// Picks the fastest kernel that applies to `cls`.
void accumulate_losses(const HypothesisClass& cls, std::span<const CollectedExample> batch,
                       LossSums& sums);

std::size_t count_in_region_serial(const DisagreementRegion& region, std::span<const Point> pool);
std::size_t count_in_region_parallel(const DisagreementRegion& region, std::span<const Point> pool);

/// Row-major predictions[h * points.size() + i] = h(points[i]).
std::vector<Label> prediction_matrix_serial(const HypothesisClass& cls, std::span<const Point> points);
std::vector<Label> prediction_matrix_parallel(const HypothesisClass& cls, std::span<const Point> points);

}  // namespace wlac::kernels
