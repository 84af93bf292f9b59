#include "wlac/kernels.hpp"

#include <algorithm>

namespace wlac::kernels {

std::vector<double> LossSums::means(EstimatorMode mode) const {
  const auto& s = sums(mode);
  std::vector<double> out(s.size(), 0.0);
  if (count == 0) return out;
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t h = 0; h < s.size(); ++h) out[h] = s[h] * inv;
  return out;
}

void accumulate_losses_serial(const HypothesisClass& cls, std::span<const CollectedExample> batch,
                              LossSums& sums) {
  const std::size_t H = cls.size();
  for (std::size_t h = 0; h < H; ++h) {
    double dr = 0.0, iw = 0.0;
    for (const auto& z : batch) {
      const Label pred = cls.predict(h, z.x());
      dr += shifted_dr_loss(pred, z.y(), z.weak(), z.weight());
      iw += iw_loss(pred, z.y(), z.weight());
    }
    sums.dr[h] += dr;
    sums.iw[h] += iw;
  }
  sums.count += batch.size();
}

void accumulate_losses_parallel(const HypothesisClass& cls, std::span<const CollectedExample> batch,
                                LossSums& sums) {
  const auto H = static_cast<std::ptrdiff_t>(cls.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t h = 0; h < H; ++h) {
    double dr = 0.0, iw = 0.0;
    for (const auto& z : batch) {
      const Label pred = cls.predict(static_cast<HypothesisId>(h), z.x());
      dr += shifted_dr_loss(pred, z.y(), z.weak(), z.weight());
      iw += iw_loss(pred, z.y(), z.weight());
    }
    sums.dr[h] += dr;
    sums.iw[h] += iw;
  }
  sums.count += batch.size();
}

void accumulate_losses_threshold(const ThresholdGrid& grid, std::span<const CollectedExample> batch,
                                 LossSums& sums) {
  // Hypotheses with id < k predict 1 on x, the rest predict 0, so every
  // example adds one constant over [0, k) and another over [k, H).
  const std::size_t H = grid.size();
  std::vector<double> d_dr(H + 1, 0.0), d_iw(H + 1, 0.0);
  for (const auto& z : batch) {
    const std::size_t k = grid.cuts_below(z.x());
    const double dr1 = shifted_dr_loss(1, z.y(), z.weak(), z.weight());
    const double dr0 = shifted_dr_loss(0, z.y(), z.weak(), z.weight());
    const double iw1 = iw_loss(1, z.y(), z.weight());
    const double iw0 = iw_loss(0, z.y(), z.weight());
    d_dr[0] += dr1;
    d_dr[k] += dr0 - dr1;
    d_iw[0] += iw1;
    d_iw[k] += iw0 - iw1;
  }
  double run_dr = 0.0, run_iw = 0.0;
  for (std::size_t h = 0; h < H; ++h) {
    run_dr += d_dr[h];
    run_iw += d_iw[h];
    sums.dr[h] += run_dr;
    sums.iw[h] += run_iw;
  }
  sums.count += batch.size();
}

void accumulate_losses(const HypothesisClass& cls, std::span<const CollectedExample> batch,
                       LossSums& sums) {
  if (const auto* grid = dynamic_cast<const ThresholdGrid*>(&cls)) {
    accumulate_losses_threshold(*grid, batch, sums);
  } else {
    accumulate_losses_parallel(cls, batch, sums);
  }
}

std::size_t count_in_region_serial(const DisagreementRegion& region, std::span<const Point> pool) {
  std::size_t n = 0;
  for (const auto& x : pool) n += region.contains(x) ? 1 : 0;
  return n;
}

std::size_t count_in_region_parallel(const DisagreementRegion& region, std::span<const Point> pool) {
  const auto N = static_cast<std::ptrdiff_t>(pool.size());
  std::size_t n = 0;
#pragma omp parallel for reduction(+ : n) schedule(static)
  for (std::ptrdiff_t i = 0; i < N; ++i) n += region.contains(pool[i]) ? 1 : 0;
  return n;
}

std::vector<Label> prediction_matrix_serial(const HypothesisClass& cls, std::span<const Point> points) {
  const std::size_t H = cls.size(), P = points.size();
  std::vector<Label> out(H * P);
  for (std::size_t h = 0; h < H; ++h)
    for (std::size_t i = 0; i < P; ++i) out[h * P + i] = cls.predict(h, points[i]);
  return out;
}

std::vector<Label> prediction_matrix_parallel(const HypothesisClass& cls, std::span<const Point> points) {
  const auto H = static_cast<std::ptrdiff_t>(cls.size());
  const std::size_t P = points.size();
  std::vector<Label> out(cls.size() * P);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t h = 0; h < H; ++h)
    for (std::size_t i = 0; i < P; ++i)
      out[static_cast<std::size_t>(h) * P + i] = cls.predict(static_cast<HypothesisId>(h), points[i]);
  return out;
}

}  // namespace wlac::kernels
