#include "wlac/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace wlac {

ScheduleConstants ScheduleConstants::theory(std::size_t n, double eps_final) {
  ScheduleConstants k;
  k.preset = "theory";
  k.alpha = 1.0;
  k.eta = 864.0;
  k.gamma = k.eta / 4.0;
  k.c1 = 6.0 * k.alpha;
  k.c2 = k.eta * k.c1 * k.c1 / 2.0 + 13.0;
  k.c3 = 1.0;
  const double scale = static_cast<double>(n) * eps_final * std::log(static_cast<double>(n));
  k.xi = 1.0 / (8.0 * scale);
  k.beta = std::sqrt(k.eta / (864.0 * k.gamma * scale));
  return k;
}

ScheduleConstants ScheduleConstants::practical() {
  ScheduleConstants k;
  k.preset = "practical";
  k.c1 = 3.2;
  k.c2 = 0.0011;
  k.c3 = 0.02;
  k.alpha = 1.1;
  k.beta = 0.014;
  k.gamma = 2.0;
  k.eta = 1.0;
  k.xi = 1e-6;
  return k;
}

ScheduleConstants ScheduleConstants::unit() {
  ScheduleConstants k;
  k.preset = "unit";
  return k;
}

void ScheduleConstants::validate(std::size_t n, double eps_final) const {
  const std::pair<const char*, double> all[] = {{"c1", c1},   {"c2", c2},       {"c3", c3},   {"alpha", alpha},
                                                {"beta", beta}, {"gamma", gamma}, {"eta", eta}, {"xi", xi}};
  for (const auto& [name, v] : all) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("constants.") + name, "must be positive");
  }
  if (preset != "theory") return;
  const double scale = static_cast<double>(n) * eps_final * std::log(static_cast<double>(n));
  const double tol = 1e-12;
  if (alpha < 1.0) throw ConfigError("constants.alpha", "theory preset needs alpha >= 1");
  if (eta < 864.0) throw ConfigError("constants.eta", "theory preset needs eta >= 864");
  if (xi > 1.0 / (8.0 * scale) * (1 + tol)) throw ConfigError("constants.xi", "theory preset needs xi <= 1/(8 n eps_M ln n)");
  if (beta * beta > eta / (864.0 * gamma * scale) * (1 + tol))
    throw ConfigError("constants.beta", "theory preset needs beta^2 <= eta/(864 gamma n eps_M ln n)");
  if (gamma < eta / 4.0) throw ConfigError("constants.gamma", "theory preset needs gamma >= eta/4");
  if (c1 < 6.0 * alpha) throw ConfigError("constants.c1", "theory preset needs c1 >= 6 alpha");
  if (c2 < eta * c1 * c1 / 2.0 + 13.0) throw ConfigError("constants.c2", "theory preset needs c2 >= eta c1^2/2 + 13");
  if (c3 < 1.0) throw ConfigError("constants.c3", "theory preset needs c3 >= 1");
}

double err_on_dataset(const HypothesisClass& cls, HypothesisId h, std::span<const CollectedExample> data,
                      EstimatorMode mode) {
  if (data.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& z : data) sum += example_loss(cls.predict(h, z.x()), z, mode);
  return sum / static_cast<double>(data.size());
}

double regret(const HypothesisClass& cls, HypothesisId h, HypothesisId h_prime,
              std::span<const CollectedExample> data, EstimatorMode mode) {
  return err_on_dataset(cls, h, data, mode) - err_on_dataset(cls, h_prime, data, mode);
}

double epsilon_m(std::size_t sum_L, std::size_t class_size, double delta) {
  const double s = static_cast<double>(sum_L);
  return 32.0 * (std::log(static_cast<double>(class_size) / delta) + std::log(s)) / s;
}

double delta_m(double err_best, double eps, std::size_t sum_L, const ScheduleConstants& k) {
  return k.c1 * std::sqrt(eps * std::max(err_best, 0.0)) + k.c2 * eps * std::log(static_cast<double>(sum_L));
}

double p_min(std::size_t prev_sum_L, double err_best_biased, std::size_t n, double eps_final, double c3) {
  if (prev_sum_L == 0) return 0.5;
  const double s = static_cast<double>(prev_sum_L);
  const double denom =
      std::sqrt(s * std::max(err_best_biased, 0.0) / (static_cast<double>(n) * eps_final)) + std::log(s);
  if (!(denom > 0.0)) return 0.5;
  return std::min(c3 / denom, 0.5);
}

}  // namespace wlac
