#pragma once

#include <span>
#include <vector>

#include "wlac/core.hpp"

namespace wlac {

/// One weighted cross-entropy term: coef * CE(model(x), label). Coefficients
/// may be negative (doubly robust correction terms).
struct TrainTerm {
  const Point* x;
  Label label;
  double coef;
};

struct TrainOptions {
  double step = 0.5;
  std::size_t epochs = 500;
  std::size_t patience = 20;
  double l2 = 1e-3;
  bool parallel = true;
};

struct LabeledPoint {
  Point x;
  Label y;
};

/// Multinomial logistic regression with a bias column.
class LinearSoftmaxModel {
 public:
  LinearSoftmaxModel(std::size_t classes, std::size_t dim);

  std::size_t classes() const noexcept { return k_; }
  std::size_t dim() const noexcept { return d_; }
  /// Row-major k x (d + 1); the last column is the bias.
  const std::vector<double>& weights() const noexcept { return w_; }
  std::vector<double>& weights() noexcept { return w_; }

  std::vector<double> predict_proba(const Point& x) const;
  Label predict(const Point& x) const;
  /// Shannon entropy (nats) of predict_proba(x).
  double entropy(const Point& x) const;

  double mean_cross_entropy(std::span<const LabeledPoint> data) const;
  double zero_one_error(std::span<const LabeledPoint> data) const;

  /// Full-batch gradient descent from zero weights on the mean of the terms
  /// plus l2/2 |W|^2, keeping the weights with the best validation loss.
  /// Returns the number of epochs run.
  std::size_t fit(std::span<const TrainTerm> terms, std::span<const LabeledPoint> validation,
                  const TrainOptions& opt);

 private:
  std::size_t k_;
  std::size_t d_;
  std::vector<double> w_;
};

namespace kernels {

/// Gradient of sum_i coef_i CE(x_i, label_i) w.r.t. the weights (not averaged).
std::vector<double> softmax_gradient_serial(const LinearSoftmaxModel& model, std::span<const TrainTerm> terms);
/// Same sum over fixed-size chunks in parallel; the chunk partials are added
/// in chunk order so the result does not depend on the thread count.
std::vector<double> softmax_gradient_parallel(const LinearSoftmaxModel& model, std::span<const TrainTerm> terms);

}  // namespace kernels
}  // namespace wlac
