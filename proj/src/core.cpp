#include "wlac/core.hpp"

#include <algorithm>
#include <cmath>

namespace wlac {

Point::Point(std::vector<double> features) : features_(std::move(features)) {
  for (double v : features_) {
    if (!std::isfinite(v)) throw std::invalid_argument("Point: non-finite feature");
  }
}

Point::Point(std::initializer_list<double> features) : Point(std::vector<double>(features)) {}

CollectedExample::CollectedExample(Point x, Label y, Label weak, double weight, bool in_region)
    : x_(std::move(x)), y_(y), weak_(weak), weight_(weight), in_region_(in_region) {
  const bool ok = weight_ == 0.0 || weight_ == 1.0 ||
                  (weight_ > 1.0 && weight_ <= 1.0 / kGlobalPMin && in_region_);
  if (!ok || (weight_ == 0.0 && !in_region_)) {
    throw std::logic_error("CollectedExample: weight outside {0} u [1, 1/p_min]");
  }
}

CollectedExample CollectedExample::queried(Point x, Label y, Label weak, double prob) {
  if (!(prob > 0.0) || prob > 1.0) throw std::logic_error("CollectedExample: bad query probability");
  const double w = 1.0 / std::max(prob, kGlobalPMin);
  return CollectedExample(std::move(x), y, weak, w, true);
}

CollectedExample CollectedExample::out_of_region(Point x, Label incumbent_label) {
  return CollectedExample(std::move(x), incumbent_label, incumbent_label, 1.0, false);
}

CollectedExample CollectedExample::unqueried(Point x, Label weak) {
  return CollectedExample(std::move(x), 1, weak, 0.0, true);
}

}  // namespace wlac
