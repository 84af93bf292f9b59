#pragma once

#include <span>
#include <vector>

#include "wlac/core.hpp"
#include "wlac/datagen.hpp"
#include "wlac/ledger.hpp"
#include "wlac/weaklabel.hpp"

namespace wlac {

enum class StopReason { kStep1Nowl, kStep2Nowl, kStep3UseWl };

const char* to_string(StopReason r);

struct WlEvalParams {
  std::size_t max_blocks = 1;  // M
  std::size_t n = 1;
  double delta = 0.1;
  bool factor_two = true;  // 2 * hat + slack instead of hat + slack
  double kappa = 1.0;
};

struct WlEvalOutcome {
  bool use_wl = false;
  double wlerr_dot = 1.0;
  std::vector<EvalExample> eval_set;
  std::size_t k_final = 0;
  StopReason stop_reason = StopReason::kStep1Nowl;

  double wlerr_hat = 0.0;
  double wlerr_bar = 0.0;
  std::size_t new_unlabeled = 0;
  std::size_t new_strong = 0;
  std::size_t reused = 0;
  std::size_t consumed = 0;  // practical: batch points used from the front
  bool budget_exceeded = false;

  /// Throws std::logic_error unless use_wl == false implies wlerr_dot == 1.
  void check() const;
};

/// ln(2 M ln(n) / delta).
double wl_log_term(std::size_t M, std::size_t n, double delta);

/// ceil(log2(6 / err_bar)) clamped at 0. Throws for err_bar <= 0.
std::size_t k_start(double err_bar);

/// min{2 hat + 2^-k, dis_mass}; the factor on hat drops to 1 when factor_two is false.
double pessimistic_wlerr(double hat, std::size_t k, double dis_mass, bool factor_two = true);

bool step1_should_skip(double N_m, double err_bar, std::size_t eval_set_size, double dis_mass,
                       std::size_t M, std::size_t n, double delta);

bool step3_can_stop(double N_m, double kappa_term, std::size_t L_m, double p_min, double dis_mass,
                    std::size_t k, std::size_t M, std::size_t n, double delta);

/// Fraction of the evaluation set that is labeled, inside `in_region`, and
/// has a wrong weak label.
double wlerr_hat(std::span<const EvalExample> eval_set, const RegionTest& in_region);

struct TheoreticalEvalInputs {
  double err_bar = 1.0;
  double N_m = 0.0;
  std::size_t L_m = 0;
  double p_min = 0.5;
  double dis_mass = 1.0;
};

/// Adaptive evaluation of the weak labeler on the current region. Draws from
/// the stream, queries both labelers on in-region draws and records
/// everything in `counts`.
WlEvalOutcome wl_eval_theoretical(Stream& stream, Labelers& labelers, const RegionTest& in_region,
                                  const TheoreticalEvalInputs& in, std::vector<EvalExample> carry,
                                  const WlEvalParams& params, RandomSource& rng, BlockCounts& counts);

struct PracticalEvalInputs {
  double err_val = 1.0;
  std::size_t L_plus = 1;
  double dis_mass = 1.0;  // empirical disagreement probability from past batches
  double p_min = 0.05;
  bool factor_two = true;
};

/// Batched variant: evaluation consumes points from the front of `batch`;
/// `selected[i]` is base-AL membership of batch[i]. `in_region` re-filters
/// carried evaluation samples. kappa is fixed to 1.
WlEvalOutcome wl_eval_practical(std::span<const Sample> batch, const std::vector<bool>& selected,
                                Labelers& labelers, const RegionTest& in_region, const PracticalEvalInputs& in,
                                std::vector<EvalExample> carry, RandomSource& rng, BlockCounts& counts);

}  // namespace wlac
