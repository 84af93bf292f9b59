#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "wlac/hypothesis.hpp"
#include "wlac/loss.hpp"

namespace wlac {

/// Tunable constants of the block schedule and the query-probability program.
struct ScheduleConstants {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double eta = 1.0;
  double xi = 1.0;
  std::string preset = "custom";

  /// Smallest constants satisfying the analysis constraints at horizon n
  /// (beta and xi sit on their upper bounds).
  static ScheduleConstants theory(std::size_t n, double eps_final);
  /// Desk-scale defaults used by the experiments.
  static ScheduleConstants practical();
  /// Every constant equal to 1.
  static ScheduleConstants unit();

  /// Throws ConfigError naming the first violated constraint.
  void validate(std::size_t n, double eps_final) const;
};

/// Mean loss of hypothesis h over the data; 0 for empty data.
double err_on_dataset(const HypothesisClass& cls, HypothesisId h,
                      std::span<const CollectedExample> data, EstimatorMode mode);

double regret(const HypothesisClass& cls, HypothesisId h, HypothesisId h_prime,
              std::span<const CollectedExample> data, EstimatorMode mode);

/// 32 (ln(|H| / delta) + ln(sum_L)) / sum_L.
double epsilon_m(std::size_t sum_L, std::size_t class_size, double delta);

/// c1 sqrt(eps max(err_best, 0)) + c2 eps ln(sum_L).
double delta_m(double err_best, double eps, std::size_t sum_L, const ScheduleConstants& k);

/// Per-block floor on the query probability, in (0, 1/2]. Returns 1/2 for
/// the first block (prev_sum_L == 0).
double p_min(std::size_t prev_sum_L, double err_best_biased, std::size_t n, double eps_final, double c3);

}  // namespace wlac
