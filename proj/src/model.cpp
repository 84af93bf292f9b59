#include "wlac/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wlac {
namespace {

constexpr std::size_t kChunk = 256;

void softmax_row(const LinearSoftmaxModel& m, const Point& x, double* out) {
  const std::size_t k = m.classes(), d = m.dim();
  const auto& w = m.weights();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double* row = &w[c * (d + 1)];
    double z = row[d];
    for (std::size_t i = 0; i < d; ++i) z += row[i] * x[i];
    out[c] = z;
    mx = std::max(mx, z);
  }
  double s = 0.0;
  for (std::size_t c = 0; c < k; ++c) s += (out[c] = std::exp(out[c] - mx));
  for (std::size_t c = 0; c < k; ++c) out[c] /= s;
}

void add_term_gradient(const LinearSoftmaxModel& m, const TrainTerm& t, std::vector<double>& probs,
                       double* grad) {
  const std::size_t k = m.classes(), d = m.dim();
  softmax_row(m, *t.x, probs.data());
  for (std::size_t c = 0; c < k; ++c) {
    const double g = t.coef * (probs[c] - (static_cast<Label>(c) == t.label ? 1.0 : 0.0));
    double* row = grad + c * (d + 1);
    for (std::size_t i = 0; i < d; ++i) row[i] += g * (*t.x)[i];
    row[d] += g;
  }
}

}  // namespace

LinearSoftmaxModel::LinearSoftmaxModel(std::size_t classes, std::size_t dim)
    : k_(classes), d_(dim), w_(classes * (dim + 1), 0.0) {
  if (classes < 2) throw std::invalid_argument("LinearSoftmaxModel: need at least 2 classes");
}

std::vector<double> LinearSoftmaxModel::predict_proba(const Point& x) const {
  std::vector<double> p(k_);
  softmax_row(*this, x, p.data());
  return p;
}

Label LinearSoftmaxModel::predict(const Point& x) const {
  const auto p = predict_proba(x);
  return static_cast<Label>(std::max_element(p.begin(), p.end()) - p.begin());
}

double LinearSoftmaxModel::entropy(const Point& x) const {
  double h = 0.0;
  for (double p : predict_proba(x))
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double LinearSoftmaxModel::mean_cross_entropy(std::span<const LabeledPoint> data) const {
  if (data.empty()) return 0.0;
  double s = 0.0;
  for (const auto& z : data) s -= std::log(std::max(predict_proba(z.x)[static_cast<std::size_t>(z.y)], 1e-300));
  return s / static_cast<double>(data.size());
}

double LinearSoftmaxModel::zero_one_error(std::span<const LabeledPoint> data) const {
  if (data.empty()) return 0.0;
  std::size_t miss = 0;
  for (const auto& z : data) miss += predict(z.x) != z.y;
  return static_cast<double>(miss) / static_cast<double>(data.size());
}

std::size_t LinearSoftmaxModel::fit(std::span<const TrainTerm> terms, std::span<const LabeledPoint> validation,
                                    const TrainOptions& opt) {
  std::fill(w_.begin(), w_.end(), 0.0);
  if (terms.empty()) return 0;
  const double inv_n = 1.0 / static_cast<double>(terms.size());
  std::vector<double> best = w_;
  double best_loss = validation.empty() ? 0.0 : mean_cross_entropy(validation);
  std::size_t since_best = 0, epoch = 0;
  for (epoch = 1; epoch <= opt.epochs; ++epoch) {
    const auto g = opt.parallel ? kernels::softmax_gradient_parallel(*this, terms)
                                : kernels::softmax_gradient_serial(*this, terms);
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] -= opt.step * (g[i] * inv_n + opt.l2 * w_[i]);
    if (validation.empty()) continue;
    const double loss = mean_cross_entropy(validation);
    if (loss < best_loss) {
      best_loss = loss;
      best = w_;
      since_best = 0;
    } else if (++since_best >= opt.patience) {
      break;
    }
  }
  if (!validation.empty()) w_ = best;
  return std::min(epoch, opt.epochs);
}

namespace kernels {

std::vector<double> softmax_gradient_serial(const LinearSoftmaxModel& model, std::span<const TrainTerm> terms) {
  std::vector<double> grad(model.weights().size(), 0.0);
  std::vector<double> probs(model.classes());
  for (const auto& t : terms) add_term_gradient(model, t, probs, grad.data());
  return grad;
}

std::vector<double> softmax_gradient_parallel(const LinearSoftmaxModel& model, std::span<const TrainTerm> terms) {
  const std::size_t W = model.weights().size();
  const std::size_t chunks = (terms.size() + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks * W, 0.0);
#pragma omp parallel
  {
    std::vector<double> probs(model.classes());
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
      const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
      const std::size_t end = std::min(terms.size(), begin + kChunk);
      double* g = &partial[static_cast<std::size_t>(c) * W];
      for (std::size_t i = begin; i < end; ++i) add_term_gradient(model, terms[i], probs, g);
    }
  }
  std::vector<double> grad(W, 0.0);
  for (std::size_t c = 0; c < chunks; ++c)
    for (std::size_t i = 0; i < W; ++i) grad[i] += partial[c * W + i];
  return grad;
}

}  // namespace kernels
}  // namespace wlac
