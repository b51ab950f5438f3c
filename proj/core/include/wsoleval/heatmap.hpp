#pragma once

#include <cstddef>
#include <vector>

#include "wsoleval/geometry.hpp"

namespace wsoleval {

/// Raw localization map: row-major width x height grid of finite scores.
class LocMap {
 public:
  LocMap(std::size_t width, std::size_t height, std::vector<double> values);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  double at(std::size_t col, std::size_t row) const { return values_[row * width_ + col]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> values_;
};

/// Localization map with every value in [0,1]. Produced by normalize(), or
/// wrapped directly around data that is already on the unit scale.
class NormalizedLocMap {
 public:
  /// Values must lie in [0,1]; no rescaling is applied. A constant map is
  /// flagged degenerate.
  static NormalizedLocMap from_unit_values(std::size_t width, std::size_t height,
                                           std::vector<double> values);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  double at(std::size_t col, std::size_t row) const { return values_[row * width_ + col]; }
  double operator[](std::size_t index) const { return values_[index]; }
  const std::vector<double>& values() const { return values_; }
  bool degenerate() const { return degenerate_; }

  /// Row-major index of the maximum; ties resolve to the lowest index.
  std::size_t argmax() const;

 private:
  friend NormalizedLocMap normalize(const LocMap& map);
  NormalizedLocMap(std::size_t width, std::size_t height, std::vector<double> values,
                   bool degenerate);

  std::size_t width_;
  std::size_t height_;
  std::vector<double> values_;
  bool degenerate_;
};

/// Per-image min-max normalization. A constant map becomes all zeros and is
/// flagged degenerate.
NormalizedLocMap normalize(const LocMap& map);

/// Foreground is every pixel with value >= tau. Throws InvalidArgument for
/// tau outside [0,1].
BinaryMask binarize(const NormalizedLocMap& map, double tau);

/// Sorted set of binarization thresholds in [0,1).
class ThresholdGrid {
 public:
  /// {i / count : i = 0 .. count-1}
  static ThresholdGrid uniform(std::size_t count = 1000);
  static ThresholdGrid from_values(std::vector<double> thresholds);

  std::size_t size() const { return thresholds_.size(); }
  double operator[](std::size_t i) const { return thresholds_[i]; }
  const std::vector<double>& values() const { return thresholds_; }

 private:
  explicit ThresholdGrid(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {}
  std::vector<double> thresholds_;
};

/// Histogram bin of a unit-scale value: floor(v * bins), clipped to bins - 1.
std::size_t histogram_bin(double value, std::size_t bins);

/// Otsu's threshold over a `bins`-bin histogram of the map. Every interior
/// bin boundary k/bins is a candidate; the winner maximizes between-class
/// variance (equivalently minimizes weighted intra-class variance), ties to
/// the lowest boundary. Throws ValidationError for a degenerate map.
double otsu_threshold(const NormalizedLocMap& map, std::size_t bins = 256);

}  // namespace wsoleval
