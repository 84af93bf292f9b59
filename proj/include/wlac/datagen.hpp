#pragma once

#include <memory>
#include <string>
#include <vector>

#include "wlac/core.hpp"
#include "wlac/hypothesis.hpp"
#include "wlac/rng.hpp"

namespace wlac {

/// A data distribution with known ground truth. Tasks are immutable; all
/// randomness comes from the RandomSource passed in.
class Task {
 public:
  virtual ~Task() = default;
  virtual std::string kind() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::size_t num_classes() const = 0;

  /// One i.i.d. draw (x, y).
  virtual Sample draw(RandomSource& rng) const = 0;
  /// P(y = c | x) for every class c.
  virtual std::vector<double> label_probs(const Point& x) const = 0;
  /// Distance from x to the Bayes decision boundary (task-specific metric).
  virtual double boundary_distance(const Point& x) const = 0;
  /// err(h) = P(h(x) != y).
  virtual double true_risk(const HypothesisClass& cls, HypothesisId h) const;
  /// Risk of the Bayes classifier.
  virtual double bayes_risk() const;

  /// True risks of every hypothesis; overridden where a closed form exists.
  virtual std::vector<double> true_risks(const HypothesisClass& cls) const;
  /// Best-in-class hypothesis h* (lowest id on ties).
  HypothesisId best_hypothesis(const HypothesisClass& cls) const;
};

/// x ~ U[0,1], y = 1[x > theta*] flipped with probability rho.
class ThresholdTask final : public Task {
 public:
  ThresholdTask(double theta_star, double label_noise);

  std::string kind() const override { return "threshold"; }
  std::size_t dim() const override { return 1; }
  std::size_t num_classes() const override { return 2; }
  Sample draw(RandomSource& rng) const override;
  std::vector<double> label_probs(const Point& x) const override;
  double boundary_distance(const Point& x) const override;
  double true_risk(const HypothesisClass& cls, HypothesisId h) const override;
  std::vector<double> true_risks(const HypothesisClass& cls) const override;
  double bayes_risk() const override { return rho_; }

  double theta_star() const noexcept { return theta_; }
  double label_noise() const noexcept { return rho_; }

 private:
  double theta_;
  double rho_;
};

/// Mixture where only an epsilon fraction of draws separates h* from the
/// rest: err(h*) = (1 - eps)/2 and err(h) = 1/2 otherwise. Realized over a
/// universe of 2|H| atoms; the matching hypothesis table comes from
/// hypotheses().
class HardExampleTask final : public Task {
 public:
  HardExampleTask(double epsilon, std::size_t class_size, std::uint64_t table_seed = 1);

  std::string kind() const override { return "hard_example"; }
  std::size_t dim() const override { return 1; }
  std::size_t num_classes() const override { return 2; }
  Sample draw(RandomSource& rng) const override;
  std::vector<double> label_probs(const Point& x) const override;
  /// 0 on uninformative atoms (labels are coin flips), 1 on informative ones.
  double boundary_distance(const Point& x) const override;
  std::vector<double> true_risks(const HypothesisClass& cls) const override;
  double bayes_risk() const override { return (1.0 - eps_) / 2.0; }

  std::shared_ptr<const EnumeratedTable> hypotheses() const noexcept { return table_; }
  HypothesisId h_star() const noexcept { return h_star_; }
  double epsilon() const noexcept { return eps_; }
  bool informative(const Point& x) const { return EnumeratedTable::point_id(x) < 2; }
  double atom_probability(std::size_t atom) const;
  std::size_t num_atoms() const noexcept { return 2 * class_size_; }

 private:
  double eps_;
  std::size_t class_size_;
  HypothesisId h_star_;
  std::shared_ptr<EnumeratedTable> table_;
};

/// k equal-prior isotropic Gaussians in d dimensions, means on a circle of
/// the given radius in the first two coordinates.
class BlobsTask final : public Task {
 public:
  BlobsTask(std::size_t classes, std::size_t dim, double spread, double radius = 1.0);

  std::string kind() const override { return "blobs"; }
  std::size_t dim() const override { return dim_; }
  std::size_t num_classes() const override { return means_.size(); }
  Sample draw(RandomSource& rng) const override;
  std::vector<double> label_probs(const Point& x) const override;
  /// Distance to the bisector between the nearest and second-nearest means.
  double boundary_distance(const Point& x) const override;
  double bayes_risk() const override;
  Label bayes_label(const Point& x) const;

 private:
  std::size_t dim_;
  double spread_;
  std::vector<std::vector<double>> means_;
};

/// Rows replayed from a CSV file (header f0..f{d-1}, y[, ywl]).
class ReplayTask final : public Task {
 public:
  ReplayTask(std::vector<Sample> rows, std::size_t num_classes, bool has_weak);

  std::string kind() const override { return "replay"; }
  std::size_t dim() const override { return rows_.front().x.dim(); }
  std::size_t num_classes() const override { return classes_; }
  /// Uniform resample of a row (the empirical distribution).
  Sample draw(RandomSource& rng) const override;
  /// Empirical label frequencies among rows sharing x; unseen x gets uniform.
  std::vector<double> label_probs(const Point& x) const override;
  double boundary_distance(const Point& x) const override;
  std::vector<double> true_risks(const HypothesisClass& cls) const override;
  double bayes_risk() const override;

  const std::vector<Sample>& rows() const noexcept { return rows_; }
  bool has_weak() const noexcept { return has_weak_; }

 private:
  std::vector<Sample> rows_;
  std::size_t classes_;
  bool has_weak_;
};

/// Reads a replay file. `num_classes == 0` infers max label + 1. Throws
/// Error with the offending line number on malformed rows or labels outside
/// the class range.
std::shared_ptr<ReplayTask> load_csv_stream(const std::string& path, std::size_t num_classes = 0);

/// Sequential access to the data stream of one trial.
class Stream {
 public:
  virtual ~Stream() = default;
  /// Next sample; throws StreamExhausted when a finite stream runs out.
  virtual Sample next(RandomSource& rng) = 0;
  virtual std::size_t consumed() const = 0;
};

/// Unlimited i.i.d. draws from a task.
class SyntheticStream final : public Stream {
 public:
  explicit SyntheticStream(std::shared_ptr<const Task> task) : task_(std::move(task)) {}
  Sample next(RandomSource& rng) override {
    ++consumed_;
    return task_->draw(rng);
  }
  std::size_t consumed() const override { return consumed_; }

 private:
  std::shared_ptr<const Task> task_;
  std::size_t consumed_ = 0;
};

/// Finite cursor over replay rows, optionally shuffled once by seed.
class ReplayStream final : public Stream {
 public:
  ReplayStream(std::shared_ptr<const ReplayTask> task, std::optional<std::uint64_t> shuffle_seed);
  Sample next(RandomSource& rng) override;
  std::size_t consumed() const override { return cursor_; }

 private:
  std::shared_ptr<const ReplayTask> task_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

std::unique_ptr<Stream> make_stream(const std::shared_ptr<const Task>& task,
                                    std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace wlac
