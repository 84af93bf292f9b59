#include "wlac/weaklabel.hpp"

#include <algorithm>

namespace wlac {
namespace {

Label flip(Label y, std::size_t classes, RandomSource& rng) {
  if (classes == 2) return 1 - y;
  auto other = static_cast<Label>(rng.below(classes - 1));
  return other >= y ? other + 1 : other;
}

}  // namespace

NoisyAnnotator::NoisyAnnotator(double p, std::size_t num_classes) : p_(p), classes_(num_classes) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("weak_labeler.p", "must lie in [0, 1]");
  if (num_classes < 2) throw ConfigError("weak_labeler", "need at least 2 classes");
}

Label NoisyAnnotator::draw(const Sample& s, RandomSource& rng) const {
  return rng.bernoulli(p_) ? flip(s.y, classes_, rng) : s.y;
}

LocalizedLabeler::LocalizedLabeler(std::shared_ptr<const Task> task, double band, double p_out)
    : task_(std::move(task)), band_(band), p_out_(p_out) {
  if (!(band >= 0.0)) throw ConfigError("weak_labeler.band", "must be nonnegative");
  if (!(p_out >= 0.0 && p_out <= 1.0)) throw ConfigError("weak_labeler.p_out", "must lie in [0, 1]");
}

double LocalizedLabeler::cond_error(const Point& x) const {
  return task_->boundary_distance(x) <= band_ ? 0.0 : p_out_;
}

Label LocalizedLabeler::draw(const Sample& s, RandomSource& rng) const {
  return rng.bernoulli(cond_error(s.x)) ? flip(s.y, task_->num_classes(), rng) : s.y;
}

BiasedHypothesisLabeler::BiasedHypothesisLabeler(std::shared_ptr<const Task> task,
                                                 std::shared_ptr<const HypothesisClass> aux, HypothesisId g)
    : task_(std::move(task)), aux_(std::move(aux)), g_(g) {
  if (g_ >= aux_->size()) throw ConfigError("weak_labeler.g", "hypothesis id out of range");
}

Label BiasedHypothesisLabeler::draw(const Sample& s, RandomSource&) const { return aux_->predict(g_, s.x); }

double BiasedHypothesisLabeler::cond_error(const Point& x) const {
  const auto probs = task_->label_probs(x);
  return 1.0 - probs.at(static_cast<std::size_t>(aux_->predict(g_, x)));
}

Label RecordedLabeler::draw(const Sample& s, RandomSource&) const {
  if (!s.recorded_weak) throw Error("replay row carries no weak label");
  return *s.recorded_weak;
}

double RecordedLabeler::cond_error(const Point&) const {
  throw Error("recorded weak labels have no known conditional error");
}

KappaReport kappa_of_region(const WeakLabeler& oracle, const RegionTest& in_region,
                            std::span<const Point> support) {
  KappaReport r;
  r.min_cond_err = 1.0;
  for (const auto& x : support) {
    if (!in_region(x)) continue;
    const double e = oracle.cond_error(x);
    r.max_cond_err = std::max(r.max_cond_err, e);
    r.min_cond_err = std::min(r.min_cond_err, e);
    ++r.support_in_region;
  }
  if (r.support_in_region == 0) throw std::invalid_argument("kappa_of_region: no support point inside the region");
  if (r.max_cond_err == 0.0) {
    r.kappa = 1.0;
  } else if (r.min_cond_err == 0.0) {
    r.kappa = kInfiniteKappa;
  } else {
    r.kappa = r.max_cond_err / r.min_cond_err;
  }
  return r;
}

double true_wlerr(const WeakLabeler& oracle, const RegionTest& in_region, std::span<const Point> support) {
  return kappa_of_region(oracle, in_region, support).max_cond_err;
}

}  // namespace wlac
