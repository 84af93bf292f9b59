#include "wlac/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "wlac/kernels.hpp"

namespace wlac {

ThresholdGrid::ThresholdGrid(double lo, double hi, std::size_t count) {
  if (count < 2) throw std::invalid_argument("ThresholdGrid: need at least 2 cuts");
  if (!(hi > lo)) throw std::invalid_argument("ThresholdGrid: need hi > lo");
  cuts_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    cuts_[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
}

Label ThresholdGrid::predict(HypothesisId h, const Point& x) const {
  return x[0] > cuts_.at(h) ? 1 : 0;
}

std::size_t ThresholdGrid::cuts_below(const Point& x) const {
  return static_cast<std::size_t>(std::lower_bound(cuts_.begin(), cuts_.end(), x[0]) - cuts_.begin());
}

HypothesisId ThresholdGrid::nearest(double v) const {
  HypothesisId best = 0;
  for (HypothesisId h = 1; h < cuts_.size(); ++h) {
    if (std::abs(cuts_[h] - v) < std::abs(cuts_[best] - v)) best = h;
  }
  return best;
}

IntervalGrid::IntervalGrid(double lo, double hi, std::size_t points) {
  if (points < 3) throw std::invalid_argument("IntervalGrid: need at least 3 grid points");
  if (!(hi > lo)) throw std::invalid_argument("IntervalGrid: need hi > lo");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  for (std::size_t a = 0; a < points; ++a)
    for (std::size_t b = a + 1; b < points; ++b) bounds_.emplace_back(g[a], g[b]);
}

Label IntervalGrid::predict(HypothesisId h, const Point& x) const {
  const auto [a, b] = bounds_.at(h);
  return (x[0] > a && x[0] <= b) ? 1 : 0;
}

EnumeratedTable::EnumeratedTable(std::vector<std::vector<Label>> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) throw std::invalid_argument("EnumeratedTable: need at least 2 hypotheses");
  for (const auto& row : labels_) {
    if (row.size() != labels_.front().size() || row.empty()) {
      throw std::invalid_argument("EnumeratedTable: ragged or empty table");
    }
  }
}

std::size_t EnumeratedTable::point_id(const Point& x) {
  const double v = std::round(x[0]);
  if (v < 0) throw std::out_of_range("EnumeratedTable: negative point id");
  return static_cast<std::size_t>(v);
}

Label EnumeratedTable::predict(HypothesisId h, const Point& x) const {
  return labels_.at(h).at(point_id(x));
}

std::shared_ptr<EnumeratedTable> load_enumerated_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": missing header");
  std::map<std::pair<std::size_t, std::size_t>, Label> cells;
  std::size_t max_h = 0, max_p = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw Error(path + ":" + std::to_string(lineno) + ": expected 3 columns");
    }
    try {
      const auto h = std::stoul(a), p = std::stoul(b);
      const auto l = static_cast<Label>(std::stol(c));
      if (!cells.emplace(std::make_pair(h, p), l).second) {
        throw Error(path + ":" + std::to_string(lineno) + ": duplicate entry");
      }
      max_h = std::max<std::size_t>(max_h, h);
      max_p = std::max<std::size_t>(max_p, p);
    } catch (const std::logic_error&) {
      throw Error(path + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  if (cells.size() != (max_h + 1) * (max_p + 1)) throw Error(path + ": table is not complete");
  std::vector<std::vector<Label>> labels(max_h + 1, std::vector<Label>(max_p + 1));
  for (const auto& [key, l] : cells) labels[key.first][key.second] = l;
  return std::make_shared<EnumeratedTable>(std::move(labels));
}

bool ActiveSet::contains(HypothesisId h) const {
  return std::binary_search(members.begin(), members.end(), h);
}

ActiveSet full_active_set(const HypothesisClass& cls, HypothesisId incumbent) {
  ActiveSet a;
  a.members.resize(cls.size());
  for (HypothesisId h = 0; h < cls.size(); ++h) a.members[h] = h;
  a.incumbent = incumbent;
  return a;
}

ActiveSet build_active_set(const HypothesisClass& cls, std::span<const double> errs,
                           HypothesisId incumbent, double radius) {
  if (errs.size() != cls.size()) throw std::invalid_argument("build_active_set: errs size mismatch");
  if (!(radius >= 0.0)) throw std::invalid_argument("build_active_set: negative radius");
  const double best = errs[incumbent];
  if (*std::min_element(errs.begin(), errs.end()) < best) {
    throw std::invalid_argument("build_active_set: incumbent is not the minimizer");
  }
  ActiveSet a;
  a.incumbent = incumbent;
  for (HypothesisId h = 0; h < errs.size(); ++h) {
    if (errs[h] - best <= radius) a.members.push_back(h);
  }
  return a;
}

DisagreementRegion::DisagreementRegion(std::shared_ptr<const HypothesisClass> cls, ActiveSet active)
    : cls_(std::move(cls)), active_(std::move(active)) {
  if (active_.members.empty() || !active_.contains(active_.incumbent)) {
    throw std::invalid_argument("DisagreementRegion: incumbent must be an active member");
  }
  grid_ = dynamic_cast<const ThresholdGrid*>(cls_.get());
  if (grid_ != nullptr) {
    lo_cut_ = grid_->cut(active_.members.front());
    hi_cut_ = grid_->cut(active_.members.back());
  }
}

bool DisagreementRegion::contains(const Point& x) const {
  if (grid_ != nullptr) return x[0] > lo_cut_ && x[0] <= hi_cut_;
  const Label first = cls_->predict(active_.members.front(), x);
  for (std::size_t i = 1; i < active_.members.size(); ++i) {
    if (cls_->predict(active_.members[i], x) != first) return true;
  }
  return false;
}

double disagreement_mass(const DisagreementRegion& region, std::span<const Point> pool) {
  if (pool.empty()) throw std::invalid_argument("disagreement_mass: empty pool");
  return static_cast<double>(kernels::count_in_region_parallel(region, pool)) /
         static_cast<double>(pool.size());
}

HypothesisId erm(const HypothesisClass& cls, std::span<const CollectedExample> data, EstimatorMode mode) {
  kernels::LossSums sums(cls.size());
  kernels::accumulate_losses(cls, data, sums);
  const auto& s = sums.sums(mode);
  return static_cast<HypothesisId>(std::min_element(s.begin(), s.end()) - s.begin());
}

double disagreement_coefficient(const HypothesisClass& cls,
                                const std::function<Point(RandomSource&)>& sampler,
                                HypothesisId h_star, double r0, std::size_t samples,
                                RandomSource& rng) {
  if (!(r0 > 0.0)) throw std::invalid_argument("disagreement_coefficient: r0 must be positive");
  std::vector<Point> pts;
  pts.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) pts.push_back(sampler(rng));
  const auto preds = kernels::prediction_matrix_parallel(cls, pts);
  const std::size_t H = cls.size(), P = pts.size();

  std::vector<double> dist(H, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < P; ++i) d += preds[h * P + i] != preds[h_star * P + i];
    dist[h] = static_cast<double>(d) / static_cast<double>(P);
  }

  std::vector<double> radii;
  for (double r = r0; r < 1.0; r *= 2.0) radii.push_back(r);
  radii.push_back(1.0);

  double best = 0.0;
  std::vector<HypothesisId> prev_ball;
  for (double r : radii) {
    std::vector<HypothesisId> ball;
    for (std::size_t h = 0; h < H; ++h)
      if (dist[h] <= r) ball.push_back(h);
    if (!std::includes(ball.begin(), ball.end(), prev_ball.begin(), prev_ball.end())) {
      throw std::logic_error("disagreement_coefficient: balls not nested");
    }
    std::size_t in_dis = 0;
    for (std::size_t i = 0; i < P; ++i) {
      const Label first = preds[ball.front() * P + i];
      for (HypothesisId h : ball) {
        if (preds[h * P + i] != first) {
          ++in_dis;
          break;
        }
      }
    }
    best = std::max(best, static_cast<double>(in_dis) / static_cast<double>(P) / r);
    prev_ball = std::move(ball);
  }
  return best;
}

}  // namespace wlac
