#include "wlac/wleval.hpp"

#include <algorithm>
#include <cmath>

namespace wlac {
namespace {

constexpr std::size_t kMaxK = 60;

double kappa_term(double kappa, double bar, double dis) {
  if (!(dis > 0.0)) return 0.0;
  return std::min(kappa * bar / dis, 1.0);
}

void add_eval_point(const Sample& s, bool inside, Labelers& labelers, RandomSource& rng, BlockCounts& counts,
                    WlEvalOutcome& out) {
  EvalExample e;
  e.x = s.x;
  if (inside) {
    e.y = labelers.strong(s);
    e.weak = labelers.weak(s, rng);
    e.labeled = true;
    ++counts.strong_phase1;
    ++counts.weak;
    ++out.new_strong;
  }
  out.eval_set.push_back(std::move(e));
}

}  // namespace

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kStep1Nowl:
      return "step1_nowl";
    case StopReason::kStep2Nowl:
      return "step2_nowl";
    case StopReason::kStep3UseWl:
      return "step3_usewl";
  }
  return "?";
}

void WlEvalOutcome::check() const {
  if (!use_wl && wlerr_dot != 1.0) throw std::logic_error("WlEvalOutcome: NOWL outcome must carry wlerr_dot = 1");
  if (!(wlerr_dot >= 0.0 && wlerr_dot <= 1.0)) throw std::logic_error("WlEvalOutcome: wlerr_dot outside [0, 1]");
}

double wl_log_term(std::size_t M, std::size_t n, double delta) {
  return std::log(2.0 * static_cast<double>(M) * std::log(static_cast<double>(n)) / delta);
}

std::size_t k_start(double err_bar) {
  if (!(err_bar > 0.0)) throw std::invalid_argument("k_start: err_bar must be positive");
  const double k = std::ceil(std::log2(6.0 / err_bar));
  return k <= 0.0 ? 0 : static_cast<std::size_t>(k);
}

double pessimistic_wlerr(double hat, std::size_t k, double dis_mass, bool factor_two) {
  const double f = factor_two ? 2.0 : 1.0;
  return std::min(f * hat + std::ldexp(1.0, -static_cast<int>(k)), dis_mass);
}

bool step1_should_skip(double N_m, double err_bar, std::size_t eval_set_size, double dis_mass, std::size_t M,
                       std::size_t n, double delta) {
  const double rhs = (12.0 * wl_log_term(M, n, delta) / err_bar - static_cast<double>(eval_set_size)) * dis_mass;
  return N_m <= rhs;
}

bool step3_can_stop(double N_m, double kappa_term, std::size_t L_m, double p_min, double dis_mass, std::size_t k,
                    std::size_t M, std::size_t n, double delta) {
  const double lhs = std::max(4.0 * N_m * kappa_term, static_cast<double>(L_m) * p_min * dis_mass);
  const double rhs = dis_mass * std::ldexp(1.0, static_cast<int>(k) + 1) * wl_log_term(M, n, delta);
  return lhs <= rhs;
}

double wlerr_hat(std::span<const EvalExample> eval_set, const RegionTest& in_region) {
  if (eval_set.empty()) return 0.0;
  std::size_t bad = 0;
  for (const auto& e : eval_set) bad += e.labeled && e.weak != e.y && in_region(e.x);
  return static_cast<double>(bad) / static_cast<double>(eval_set.size());
}

WlEvalOutcome wl_eval_theoretical(Stream& stream, Labelers& labelers, const RegionTest& in_region,
                                  const TheoreticalEvalInputs& in, std::vector<EvalExample> carry,
                                  const WlEvalParams& params, RandomSource& rng, BlockCounts& counts) {
  if (!(in.err_bar > 0.0)) throw std::invalid_argument("wl_eval_theoretical: err_bar must be positive");
  WlEvalOutcome out;
  out.reused = carry.size();
  out.eval_set = std::move(carry);

  const std::size_t M = params.max_blocks;
  if (step1_should_skip(in.N_m, in.err_bar, out.eval_set.size(), in.dis_mass, M, params.n, params.delta)) {
    out.stop_reason = StopReason::kStep1Nowl;
    out.check();
    return out;
  }

  const double log_term = wl_log_term(M, params.n, params.delta);
  auto grow = [&](std::size_t k) {
    const auto target = static_cast<std::size_t>(std::ceil(std::ldexp(1.0, static_cast<int>(k) + 1) * log_term));
    while (out.eval_set.size() < target) {
      Sample s = stream.next(rng);
      ++counts.unlabeled_phase1;
      ++out.new_unlabeled;
      add_eval_point(s, in_region(s.x), labelers, rng, counts, out);
    }
    out.wlerr_hat = wlerr_hat(out.eval_set, in_region);
    out.wlerr_bar = pessimistic_wlerr(out.wlerr_hat, k, in.dis_mass, params.factor_two);
    out.k_final = k;
  };

  std::size_t k = k_start(in.err_bar);
  grow(k);
  if (out.wlerr_bar >= in.err_bar) {
    out.stop_reason = StopReason::kStep2Nowl;
  } else {
    while (true) {
      const double kt = kappa_term(params.kappa, out.wlerr_bar, in.dis_mass);
      if (step3_can_stop(in.N_m, kt, in.L_m, in.p_min, in.dis_mass, k, M, params.n, params.delta) || k >= kMaxK) {
        out.use_wl = true;
        out.wlerr_dot = kt;
        out.stop_reason = StopReason::kStep3UseWl;
        break;
      }
      grow(++k);
    }
  }
  out.budget_exceeded = out.new_unlabeled > 8 * in.L_m;
  out.check();
  return out;
}

WlEvalOutcome wl_eval_practical(std::span<const Sample> batch, const std::vector<bool>& selected,
                                Labelers& labelers, const RegionTest& in_region, const PracticalEvalInputs& in,
                                std::vector<EvalExample> carry, RandomSource& rng, BlockCounts& counts) {
  if (selected.size() != batch.size()) throw std::invalid_argument("wl_eval_practical: selection size mismatch");
  WlEvalOutcome out;
  out.reused = carry.size();
  out.eval_set = std::move(carry);

  const std::size_t n_minus_initial = static_cast<std::size_t>(std::count(selected.begin(), selected.end(), true));
  const double need = in.err_val > 0.0 ? std::ceil(1.0 / in.err_val) : static_cast<double>(batch.size()) + 1.0;
  const double plus_unlabel_d = std::max(need - static_cast<double>(out.eval_set.size()), 0.0);
  if (plus_unlabel_d > static_cast<double>(batch.size())) {
    out.stop_reason = StopReason::kStep1Nowl;
    out.check();
    return out;
  }
  const auto plus_unlabel = static_cast<std::size_t>(plus_unlabel_d);
  const auto plus_label = static_cast<std::size_t>(
      std::count(selected.begin(), selected.begin() + static_cast<std::ptrdiff_t>(plus_unlabel), true));
  if (n_minus_initial <= plus_label) {
    out.stop_reason = StopReason::kStep1Nowl;
    out.check();
    return out;
  }

  auto consume = [&](std::size_t count) {
    const std::size_t end = std::min(batch.size(), out.consumed + count);
    for (; out.consumed < end; ++out.consumed) {
      ++counts.unlabeled_phase1;
      ++out.new_unlabeled;
      add_eval_point(batch[out.consumed], selected[out.consumed], labelers, rng, counts, out);
    }
    out.wlerr_hat = wlerr_hat(out.eval_set, in_region);
    const double f = in.factor_two ? 2.0 : 1.0;
    const double slack = out.eval_set.empty() ? 1.0 : 1.0 / static_cast<double>(out.eval_set.size());
    out.wlerr_bar = std::min(f * out.wlerr_hat + slack, in.dis_mass);
  };

  consume(plus_unlabel);
  out.k_final = 1;
  if (out.wlerr_bar >= in.err_val) {
    out.stop_reason = StopReason::kStep2Nowl;
    out.check();
    return out;
  }

  auto remaining_planned = [&](double wd) {
    const auto rest = static_cast<double>(
        std::count(selected.begin() + static_cast<std::ptrdiff_t>(out.consumed), selected.end(), true));
    return rest * std::max(wd, in.p_min);
  };
  double wd = kappa_term(1.0, out.wlerr_bar, in.dis_mass);
  while (remaining_planned(wd) > static_cast<double>(out.new_strong) && out.consumed < batch.size()) {
    consume(in.L_plus);
    ++out.k_final;
    wd = kappa_term(1.0, out.wlerr_bar, in.dis_mass);
  }
  out.use_wl = true;
  out.wlerr_dot = wd;
  out.stop_reason = StopReason::kStep3UseWl;
  out.check();
  return out;
}

}  // namespace wlac
