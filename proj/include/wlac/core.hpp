#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wlac {

/// Class index, 0-based. Binary tasks use {0, 1}.
using Label = std::int32_t;
using HypothesisId = std::size_t;

/// Floor on any query probability the engine will divide by; caps importance
/// weights at 1e6 even when a misconfigured plan asks for less.
inline constexpr double kGlobalPMin = 1e-6;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for invalid user configuration (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class StreamExhausted : public Error {
 public:
  StreamExhausted() : Error("unlabeled stream exhausted") {}
};

/// A feature vector. Entries are always finite.
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> features);
  Point(std::initializer_list<double> features);

  double operator[](std::size_t i) const { return features_[i]; }
  std::size_t dim() const noexcept { return features_.size(); }
  const std::vector<double>& features() const noexcept { return features_; }

  bool operator==(const Point& other) const = default;

 private:
  std::vector<double> features_;
};

/// One draw from the data stream. `recorded_weak` is only set for replayed
/// files that carry a weak-label column.
struct Sample {
  Point x;
  Label y = 0;
  std::optional<Label> recorded_weak;
};

/// A Phase-2 training record. The three factories are the only way to build
/// one; each enforces its branch of the weight trichotomy.
class CollectedExample {
 public:
  /// In-region and queried: weight 1/p, clamped so weight <= 1/kGlobalPMin.
  static CollectedExample queried(Point x, Label y, Label weak, double prob);
  /// Outside the disagreement region: both slots hold the incumbent's label.
  static CollectedExample out_of_region(Point x, Label incumbent_label);
  /// In-region, not queried. The strong slot carries the placeholder label 1.
  static CollectedExample unqueried(Point x, Label weak);

  const Point& x() const noexcept { return x_; }
  Label y() const noexcept { return y_; }
  Label weak() const noexcept { return weak_; }
  double weight() const noexcept { return weight_; }
  bool in_region() const noexcept { return in_region_; }

 private:
  CollectedExample(Point x, Label y, Label weak, double weight, bool in_region);

  Point x_;
  Label y_;
  Label weak_;
  double weight_;
  bool in_region_;
};

/// One Phase-1 evaluation record. Labels are meaningful only when `labeled`.
struct EvalExample {
  Point x;
  Label y = 1;
  Label weak = 1;
  bool labeled = false;  // drawn inside the region of its block and queried
};

}  // namespace wlac
