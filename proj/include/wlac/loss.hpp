#pragma once

#include "wlac/core.hpp"

namespace wlac {

/// Which loss estimator an error evaluation uses.
enum class EstimatorMode { kUseWl, kNowl };

inline const char* to_string(EstimatorMode m) { return m == EstimatorMode::kUseWl ? "use_wl" : "nowl"; }

/// (1[pred != y] - 1[pred != weak]) * w + 1[pred != weak]. Unbiased for
/// 1[pred != y] under inverse-propensity weights; can be negative.
inline double shifted_dr_loss(Label pred, Label y, Label weak, double w) {
  const double miss_y = pred != y ? 1.0 : 0.0;
  const double miss_weak = pred != weak ? 1.0 : 0.0;
  return (miss_y - miss_weak) * w + miss_weak;
}

inline double iw_loss(Label pred, Label y, double w) { return pred != y ? w : 0.0; }

inline double example_loss(Label pred, const CollectedExample& z, EstimatorMode mode) {
  return mode == EstimatorMode::kUseWl ? shifted_dr_loss(pred, z.y(), z.weak(), z.weight())
                                       : iw_loss(pred, z.y(), z.weight());
}

}  // namespace wlac
