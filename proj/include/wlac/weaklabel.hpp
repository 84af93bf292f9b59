#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>

#include "wlac/core.hpp"
#include "wlac/datagen.hpp"
#include "wlac/hypothesis.hpp"
#include "wlac/rng.hpp"

namespace wlac {

/// Stochastic weak label source. Conditional error at x is
/// P(weak label != y | x), known analytically for the synthetic kinds.
class WeakLabeler {
 public:
  virtual ~WeakLabeler() = default;
  virtual std::string kind() const = 0;
  virtual Label draw(const Sample& s, RandomSource& rng) const = 0;
  virtual double cond_error(const Point& x) const = 0;
  virtual bool introspectable() const { return true; }
};

/// Flips the true label with probability p (to a uniformly chosen other class).
class NoisyAnnotator final : public WeakLabeler {
 public:
  NoisyAnnotator(double p, std::size_t num_classes);
  std::string kind() const override { return "na"; }
  Label draw(const Sample& s, RandomSource& rng) const override;
  double cond_error(const Point&) const override { return p_; }
  double p() const noexcept { return p_; }

 private:
  double p_;
  std::size_t classes_;
};

/// Exact inside a band of the given width around the task's decision
/// boundary, noisy with probability p_out elsewhere.
class LocalizedLabeler final : public WeakLabeler {
 public:
  LocalizedLabeler(std::shared_ptr<const Task> task, double band, double p_out);
  std::string kind() const override { return "lc"; }
  Label draw(const Sample& s, RandomSource& rng) const override;
  double cond_error(const Point& x) const override;

 private:
  std::shared_ptr<const Task> task_;
  double band_;
  double p_out_;
};

/// Answers with a fixed hypothesis g from an auxiliary class.
class BiasedHypothesisLabeler final : public WeakLabeler {
 public:
  BiasedHypothesisLabeler(std::shared_ptr<const Task> task, std::shared_ptr<const HypothesisClass> aux,
                          HypothesisId g);
  std::string kind() const override { return "biased_hypothesis"; }
  Label draw(const Sample& s, RandomSource&) const override;
  double cond_error(const Point& x) const override;

 private:
  std::shared_ptr<const Task> task_;
  std::shared_ptr<const HypothesisClass> aux_;
  HypothesisId g_;
};

/// Replays the weak-label column of a replay file.
class RecordedLabeler final : public WeakLabeler {
 public:
  std::string kind() const override { return "recorded"; }
  Label draw(const Sample& s, RandomSource&) const override;
  double cond_error(const Point&) const override;
  bool introspectable() const override { return false; }
};

inline constexpr double kInfiniteKappa = std::numeric_limits<double>::infinity();

struct KappaReport {
  double kappa = 1.0;  // kInfiniteKappa when the minimum conditional error is 0 but the maximum is not
  double max_cond_err = 0.0;
  double min_cond_err = 0.0;
  std::size_t support_in_region = 0;

  bool finite() const noexcept { return kappa != kInfiniteKappa; }
};

using RegionTest = std::function<bool(const Point&)>;

/// Ratio of max to min conditional error over the support points inside the
/// region. Throws if no support point is inside.
KappaReport kappa_of_region(const WeakLabeler& oracle, const RegionTest& in_region,
                            std::span<const Point> support);

/// Largest conditional error over the in-region support.
double true_wlerr(const WeakLabeler& oracle, const RegionTest& in_region, std::span<const Point> support);

/// Oracle access for one trial. The call counters are kept independently of
/// the QueryLedger so the two can be reconciled.
class Labelers {
 public:
  explicit Labelers(const WeakLabeler* weak) : weak_(weak) {}

  Label strong(const Sample& s) {
    ++strong_calls_;
    return s.y;
  }
  Label weak(const Sample& s, RandomSource& rng) {
    if (weak_ == nullptr) throw Error("no weak labeler configured");
    ++weak_calls_;
    return weak_->draw(s, rng);
  }
  const WeakLabeler* weak_oracle() const noexcept { return weak_; }
  std::uint64_t strong_calls() const noexcept { return strong_calls_; }
  std::uint64_t weak_calls() const noexcept { return weak_calls_; }

 private:
  const WeakLabeler* weak_;
  std::uint64_t strong_calls_ = 0;
  std::uint64_t weak_calls_ = 0;
};

}  // namespace wlac
