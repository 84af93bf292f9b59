#include "wlac/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "wlac/kernels.hpp"

namespace wlac {
namespace {

constexpr std::size_t kMonteCarloPoints = 100000;
constexpr std::uint64_t kMonteCarloSeed = 0x5eed;

}  // namespace

std::vector<double> Task::true_risks(const HypothesisClass& cls) const {
  // Monte Carlo on a fixed internal sample, shared by all hypotheses.
  RandomSource rng(kMonteCarloSeed);
  std::vector<Point> pts;
  std::vector<std::vector<double>> probs;
  pts.reserve(kMonteCarloPoints);
  for (std::size_t i = 0; i < kMonteCarloPoints; ++i) {
    pts.push_back(draw(rng).x);
    probs.push_back(label_probs(pts.back()));
  }
  const auto preds = kernels::prediction_matrix_parallel(cls, pts);
  std::vector<double> risks(cls.size(), 0.0);
  for (std::size_t h = 0; h < cls.size(); ++h) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto l = static_cast<std::size_t>(preds[h * pts.size() + i]);
      s += 1.0 - (l < probs[i].size() ? probs[i][l] : 0.0);
    }
    risks[h] = s / static_cast<double>(pts.size());
  }
  return risks;
}

double Task::true_risk(const HypothesisClass& cls, HypothesisId h) const { return true_risks(cls).at(h); }

double Task::bayes_risk() const {
  RandomSource rng(kMonteCarloSeed);
  double s = 0.0;
  for (std::size_t i = 0; i < kMonteCarloPoints; ++i) {
    const auto p = label_probs(draw(rng).x);
    s += 1.0 - *std::max_element(p.begin(), p.end());
  }
  return s / static_cast<double>(kMonteCarloPoints);
}

HypothesisId Task::best_hypothesis(const HypothesisClass& cls) const {
  const auto r = true_risks(cls);
  return static_cast<HypothesisId>(std::min_element(r.begin(), r.end()) - r.begin());
}

// ---------------------------------------------------------------------------

ThresholdTask::ThresholdTask(double theta_star, double label_noise) : theta_(theta_star), rho_(label_noise) {
  if (!(theta_ >= 0.0 && theta_ <= 1.0)) throw ConfigError("task.theta_star", "must lie in [0, 1]");
  if (!(rho_ >= 0.0 && rho_ < 0.5)) throw ConfigError("task.label_noise", "must lie in [0, 0.5)");
}

Sample ThresholdTask::draw(RandomSource& rng) const {
  const double x = rng.uniform();
  Label y = x > theta_ ? 1 : 0;
  if (rng.bernoulli(rho_)) y = 1 - y;
  return {Point{x}, y, std::nullopt};
}

std::vector<double> ThresholdTask::label_probs(const Point& x) const {
  const double p1 = x[0] > theta_ ? 1.0 - rho_ : rho_;
  return {1.0 - p1, p1};
}

double ThresholdTask::boundary_distance(const Point& x) const { return std::abs(x[0] - theta_); }

double ThresholdTask::true_risk(const HypothesisClass& cls, HypothesisId h) const {
  if (const auto* g = dynamic_cast<const ThresholdGrid*>(&cls)) {
    const double c = std::clamp(g->cut(h), 0.0, 1.0);
    return rho_ + (1.0 - 2.0 * rho_) * std::abs(c - theta_);
  }
  return Task::true_risk(cls, h);
}

std::vector<double> ThresholdTask::true_risks(const HypothesisClass& cls) const {
  if (dynamic_cast<const ThresholdGrid*>(&cls) == nullptr) return Task::true_risks(cls);
  std::vector<double> r(cls.size());
  for (HypothesisId h = 0; h < cls.size(); ++h) r[h] = true_risk(cls, h);
  return r;
}

// ---------------------------------------------------------------------------

HardExampleTask::HardExampleTask(double epsilon, std::size_t class_size, std::uint64_t table_seed)
    : eps_(epsilon), class_size_(class_size), h_star_(class_size - 1) {
  if (!(eps_ > 0.0 && eps_ <= 1.0)) throw ConfigError("task.epsilon", "must lie in (0, 1]");
  if (class_size_ < 2) throw ConfigError("task.class_size", "must be at least 2");
  // Atom 0/1: informative, h* says 0/1 and the label agrees. Every other
  // hypothesis predicts one fixed random bit on both, so it errs on exactly
  // one of them. Atoms 2 + 2j + v: uninformative, h* says v, the j-th
  // non-optimal hypothesis says 1 - v, everyone else says v.
  RandomSource rng(table_seed);
  const std::size_t atoms = 2 * class_size_;
  std::vector<std::vector<Label>> labels(class_size_, std::vector<Label>(atoms, 0));
  std::size_t j = 0;
  for (HypothesisId h = 0; h < class_size_; ++h) {
    if (h == h_star_) {
      labels[h][0] = 0;
      labels[h][1] = 1;
    } else {
      const Label bit = rng.bernoulli(0.5) ? 1 : 0;
      labels[h][0] = labels[h][1] = bit;
    }
  }
  for (HypothesisId r = 0; r < class_size_; ++r) {
    if (r == h_star_) continue;
    for (Label v = 0; v <= 1; ++v) {
      const std::size_t atom = 2 + 2 * j + static_cast<std::size_t>(v);
      for (HypothesisId h = 0; h < class_size_; ++h) labels[h][atom] = (h == r) ? 1 - v : v;
    }
    ++j;
  }
  table_ = std::make_shared<EnumeratedTable>(std::move(labels));
}

double HardExampleTask::atom_probability(std::size_t atom) const {
  if (atom < 2) return eps_ / 2.0;
  return (1.0 - eps_) / (2.0 * static_cast<double>(class_size_ - 1));
}

Sample HardExampleTask::draw(RandomSource& rng) const {
  if (rng.bernoulli(eps_)) {
    const std::size_t atom = rng.below(2);
    return {Point{static_cast<double>(atom)}, static_cast<Label>(atom), std::nullopt};
  }
  const std::size_t j = rng.below(class_size_ - 1);
  const std::size_t v = rng.below(2);
  const Label y = rng.bernoulli(0.5) ? 1 : 0;
  return {Point{static_cast<double>(2 + 2 * j + v)}, y, std::nullopt};
}

std::vector<double> HardExampleTask::label_probs(const Point& x) const {
  const std::size_t atom = EnumeratedTable::point_id(x);
  if (atom >= num_atoms()) throw std::out_of_range("HardExampleTask: unknown atom");
  if (atom == 0) return {1.0, 0.0};
  if (atom == 1) return {0.0, 1.0};
  return {0.5, 0.5};
}

double HardExampleTask::boundary_distance(const Point& x) const { return informative(x) ? 1.0 : 0.0; }

std::vector<double> HardExampleTask::true_risks(const HypothesisClass& cls) const {
  std::vector<double> r(cls.size(), 0.0);
  for (HypothesisId h = 0; h < cls.size(); ++h) {
    double s = 0.0;
    for (std::size_t a = 0; a < num_atoms(); ++a) {
      const Point x{static_cast<double>(a)};
      const auto p = label_probs(x);
      s += atom_probability(a) * (1.0 - p[static_cast<std::size_t>(cls.predict(h, x))]);
    }
    r[h] = s;
  }
  return r;
}

// ---------------------------------------------------------------------------

BlobsTask::BlobsTask(std::size_t classes, std::size_t dim, double spread, double radius)
    : dim_(dim), spread_(spread) {
  if (classes < 2) throw ConfigError("task.classes", "must be at least 2");
  if (dim < 2) throw ConfigError("task.dim", "must be at least 2");
  if (!(spread > 0.0)) throw ConfigError("task.spread", "must be positive");
  for (std::size_t c = 0; c < classes; ++c) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
    std::vector<double> mu(dim, 0.0);
    mu[0] = radius * std::cos(a);
    mu[1] = radius * std::sin(a);
    means_.push_back(std::move(mu));
  }
}

Sample BlobsTask::draw(RandomSource& rng) const {
  const std::size_t c = rng.below(means_.size());
  std::vector<double> x(dim_);
  for (std::size_t i = 0; i < dim_; ++i) x[i] = means_[c][i] + spread_ * rng.normal();
  return {Point(std::move(x)), static_cast<Label>(c), std::nullopt};
}

std::vector<double> BlobsTask::label_probs(const Point& x) const {
  std::vector<double> logit(means_.size());
  for (std::size_t c = 0; c < means_.size(); ++c) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) d2 += (x[i] - means_[c][i]) * (x[i] - means_[c][i]);
    logit[c] = -d2 / (2.0 * spread_ * spread_);
  }
  const double mx = *std::max_element(logit.begin(), logit.end());
  double z = 0.0;
  for (double& v : logit) z += (v = std::exp(v - mx));
  for (double& v : logit) v /= z;
  return logit;
}

Label BlobsTask::bayes_label(const Point& x) const {
  const auto p = label_probs(x);
  return static_cast<Label>(std::max_element(p.begin(), p.end()) - p.begin());
}

double BlobsTask::boundary_distance(const Point& x) const {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t c = 0; c < means_.size(); ++c) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) d2 += (x[i] - means_[c][i]) * (x[i] - means_[c][i]);
    d.emplace_back(d2, c);
  }
  std::partial_sort(d.begin(), d.begin() + 2, d.end());
  const auto& a = means_[d[0].second];
  const auto& b = means_[d[1].second];
  double sep2 = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) sep2 += (a[i] - b[i]) * (a[i] - b[i]);
  return (d[1].first - d[0].first) / (2.0 * std::sqrt(sep2));
}

double BlobsTask::bayes_risk() const { return Task::bayes_risk(); }

// ---------------------------------------------------------------------------

ReplayTask::ReplayTask(std::vector<Sample> rows, std::size_t num_classes, bool has_weak)
    : rows_(std::move(rows)), classes_(num_classes), has_weak_(has_weak) {
  if (rows_.empty()) throw Error("replay: no rows");
}

Sample ReplayTask::draw(RandomSource& rng) const { return rows_[rng.below(rows_.size())]; }

std::vector<double> ReplayTask::label_probs(const Point& x) const {
  std::vector<double> counts(classes_, 0.0);
  double n = 0.0;
  for (const auto& r : rows_) {
    if (r.x == x) {
      counts[static_cast<std::size_t>(r.y)] += 1.0;
      n += 1.0;
    }
  }
  if (n == 0.0) return std::vector<double>(classes_, 1.0 / static_cast<double>(classes_));
  for (double& c : counts) c /= n;
  return counts;
}

double ReplayTask::boundary_distance(const Point&) const {
  throw Error("replay task: decision boundary unknown");
}

std::vector<double> ReplayTask::true_risks(const HypothesisClass& cls) const {
  std::vector<double> r(cls.size(), 0.0);
  for (HypothesisId h = 0; h < cls.size(); ++h) {
    std::size_t miss = 0;
    for (const auto& s : rows_) miss += cls.predict(h, s.x) != s.y;
    r[h] = static_cast<double>(miss) / static_cast<double>(rows_.size());
  }
  return r;
}

double ReplayTask::bayes_risk() const {
  // Majority label per distinct x.
  std::map<std::vector<double>, std::vector<std::size_t>> by_x;
  for (const auto& s : rows_) {
    auto& c = by_x[s.x.features()];
    c.resize(classes_, 0);
    ++c[static_cast<std::size_t>(s.y)];
  }
  std::size_t miss = 0;
  for (const auto& [x, c] : by_x) miss += std::accumulate(c.begin(), c.end(), std::size_t{0}) - *std::max_element(c.begin(), c.end());
  return static_cast<double>(miss) / static_cast<double>(rows_.size());
}

std::shared_ptr<ReplayTask> load_csv_stream(const std::string& path, std::size_t num_classes) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": missing header");
  std::vector<std::string> header;
  {
    std::istringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) {
      while (!col.empty() && (col.back() == '\r' || col.back() == ' ')) col.pop_back();
      header.push_back(col);
    }
  }
  std::size_t d = 0;
  while (d < header.size() && header[d] == "f" + std::to_string(d)) ++d;
  if (d == 0) throw Error(path + ": header must start with f0");
  if (d >= header.size() || header[d] != "y") throw Error(path + ": expected column y after features");
  const bool has_weak = header.size() == d + 2 && header[d + 1] == "ywl";
  if (header.size() != d + 1 && !has_weak) throw Error(path + ": unexpected columns after y");

  std::vector<Sample> rows;
  std::size_t lineno = 1;
  Label max_label = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw Error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " columns");
    }
    Sample s;
    try {
      std::vector<double> f(d);
      for (std::size_t i = 0; i < d; ++i) {
        std::size_t used = 0;
        f[i] = std::stod(cells[i], &used);
        if (used != cells[i].size() || !std::isfinite(f[i])) throw std::invalid_argument("feature");
      }
      s.x = Point(std::move(f));
      s.y = static_cast<Label>(std::stol(cells[d]));
      if (has_weak) s.recorded_weak = static_cast<Label>(std::stol(cells[d + 1]));
    } catch (const std::exception&) {
      throw Error(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    const Label hi = std::max(s.y, s.recorded_weak.value_or(0));
    if (s.y < 0 || s.recorded_weak.value_or(0) < 0 ||
        (num_classes != 0 && static_cast<std::size_t>(hi) >= num_classes)) {
      throw Error(path + ":" + std::to_string(lineno) + ": label outside class range");
    }
    max_label = std::max(max_label, hi);
    rows.push_back(std::move(s));
  }
  const std::size_t classes = num_classes != 0 ? num_classes : static_cast<std::size_t>(max_label) + 1;
  return std::make_shared<ReplayTask>(std::move(rows), std::max<std::size_t>(classes, 2), has_weak);
}

ReplayStream::ReplayStream(std::shared_ptr<const ReplayTask> task, std::optional<std::uint64_t> shuffle_seed)
    : task_(std::move(task)), order_(task_->rows().size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (shuffle_seed) {
    RandomSource rng(*shuffle_seed);
    std::shuffle(order_.begin(), order_.end(), rng.engine());
  }
}

Sample ReplayStream::next(RandomSource&) {
  if (cursor_ >= order_.size()) throw StreamExhausted();
  return task_->rows()[order_[cursor_++]];
}

std::unique_ptr<Stream> make_stream(const std::shared_ptr<const Task>& task,
                                    std::optional<std::uint64_t> shuffle_seed) {
  if (auto replay = std::dynamic_pointer_cast<const ReplayTask>(task)) {
    return std::make_unique<ReplayStream>(replay, shuffle_seed);
  }
  return std::make_unique<SyntheticStream>(task);
}

}  // namespace wlac
