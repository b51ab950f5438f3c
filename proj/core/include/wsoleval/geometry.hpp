#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace wsoleval {

/// Axis-aligned box in pixel coordinates, half-open on the max side:
/// [x_min, x_max) x [y_min, y_max). Construction rejects non-finite,
/// negative or zero-area boxes, so every BBox in flight is valid.
class BBox {
 public:
  BBox(double x_min, double y_min, double x_max, double y_max);

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }
  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double area() const { return width() * height(); }

  /// True if the center of pixel (col, row) lies inside the box.
  bool contains_pixel(std::size_t col, std::size_t row) const;

  std::string to_string() const;

  friend bool operator==(const BBox&, const BBox&) = default;

 private:
  double x_min_;
  double y_min_;
  double x_max_;
  double y_max_;
};

/// True if the coordinates would form a valid BBox.
bool is_valid_box(double x_min, double y_min, double x_max, double y_max);

double iou(const BBox& a, const BBox& b);

/// Intersect with [0,width) x [0,height). An empty or degenerate
/// intersection collapses to a 1x1 box at the nearest in-bounds corner.
BBox clamp_box(const BBox& box, int width, int height);

/// Same rule on raw coordinates, which may be negative (external proposal
/// files). Requires finite values with min < max; width or height may be
/// +infinity to clip at the origin only.
BBox clamp_box(double x_min, double y_min, double x_max, double y_max, double width, double height);

class BinaryMask {
 public:
  BinaryMask(std::size_t width, std::size_t height, bool fill = false);
  BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool at(std::size_t col, std::size_t row) const { return bits_[row * width_ + col] != 0; }
  void set(std::size_t col, std::size_t row, bool value = true) {
    bits_[row * width_ + col] = value ? 1 : 0;
  }
  bool operator[](std::size_t index) const { return bits_[index] != 0; }

  std::size_t count() const;
  /// this is a subset of other (same dimensions required).
  bool subset_of(const BinaryMask& other) const;

  const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> bits_;
};

enum class Connectivity { Four, Eight };

struct ComponentLabeling {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint32_t> labels;  // 0 = background, components are 1..component_count
  std::uint32_t component_count = 0;
  std::vector<std::size_t> areas;  // areas[label - 1]
};

/// Labels are assigned in raster-scan order of each component's first pixel.
ComponentLabeling connected_components(const BinaryMask& mask,
                                       Connectivity connectivity = Connectivity::Eight);

enum class BoxMode { LargestComponent, AllComponents };

/// Tight boxes around the mask's connected components. LargestComponent
/// returns at most one box (pixel count, ties to the smallest label).
std::vector<BBox> boxes_from_mask(const BinaryMask& mask, BoxMode mode,
                                  Connectivity connectivity = Connectivity::Eight);

/// Tight box per component, indexed by label - 1.
std::vector<BBox> component_boxes(const ComponentLabeling& labeling);

/// Rasterize boxes into a mask using the pixel-center rule of BBox::contains_pixel.
BinaryMask rasterize(const std::vector<BBox>& boxes, std::size_t width, std::size_t height);

}  // namespace wsoleval
