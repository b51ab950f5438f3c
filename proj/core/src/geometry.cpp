#include "wsoleval/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wsoleval/error.hpp"

namespace wsoleval {

bool is_valid_box(double x_min, double y_min, double x_max, double y_max) {
  for (double v : {x_min, y_min, x_max, y_max}) {
    if (!std::isfinite(v) || v < 0.0) return false;
  }
  return x_min < x_max && y_min < y_max;
}

BBox::BBox(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
  if (!is_valid_box(x_min, y_min, x_max, y_max)) {
    throw InvalidArgument("invalid box " + to_string() +
                          ": coordinates must be finite, non-negative, with min < max");
  }
}

bool BBox::contains_pixel(std::size_t col, std::size_t row) const {
  const double cx = static_cast<double>(col) + 0.5;
  const double cy = static_cast<double>(row) + 0.5;
  return cx >= x_min_ && cx < x_max_ && cy >= y_min_ && cy < y_max_;
}

std::string BBox::to_string() const {
  std::ostringstream os;
  os << "(" << x_min_ << ", " << y_min_ << ", " << x_max_ << ", " << y_max_ << ")";
  return os.str();
}

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double ih = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BBox clamp_box(double x_min, double y_min, double x_max, double y_max, double width, double height) {
  if (!(width > 0.0 && height > 0.0)) {
    throw InvalidArgument("clamp_box: image dimensions must be positive");
  }
  for (double v : {x_min, y_min, x_max, y_max}) {
    if (!std::isfinite(v)) throw InvalidArgument("clamp_box: coordinates must be finite");
  }
  if (!(x_min < x_max && y_min < y_max)) throw InvalidArgument("clamp_box: degenerate box");
  const double x0 = std::clamp(x_min, 0.0, width);
  const double y0 = std::clamp(y_min, 0.0, height);
  const double x1 = std::clamp(x_max, 0.0, width);
  const double y1 = std::clamp(y_max, 0.0, height);
  if (x0 < x1 && y0 < y1) return BBox(x0, y0, x1, y1);
  const double cx = std::clamp(std::floor(x_min), 0.0, width - 1.0);
  const double cy = std::clamp(std::floor(y_min), 0.0, height - 1.0);
  return BBox(cx, cy, cx + 1.0, cy + 1.0);
}

BBox clamp_box(const BBox& box, int width, int height) {
  return clamp_box(box.x_min(), box.y_min(), box.x_max(), box.y_max(), width, height);
}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, bool fill)
    : width_(width), height_(height), bits_(width * height, fill ? 1 : 0) {
  if (width == 0 || height == 0) throw InvalidArgument("mask dimensions must be positive");
}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width == 0 || height == 0) throw InvalidArgument("mask dimensions must be positive");
  if (bits_.size() != width * height) {
    throw InvalidArgument("mask bit count does not match width x height");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool BinaryMask::subset_of(const BinaryMask& other) const {
  if (width_ != other.width_ || height_ != other.height_) return false;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // keep the smaller provisional label as root
    if (a < b) parent_[b] = a; else parent_[a] = b;
  }

  std::uint32_t add() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

ComponentLabeling connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const std::size_t w = mask.width();
  const std::size_t h = mask.height();
  ComponentLabeling out;
  out.width = w;
  out.height = h;
  out.labels.assign(w * h, 0);

  // Two-pass labeling with provisional labels merged in a disjoint set.
  DisjointSet sets(1);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      std::uint32_t neighbours[4];
      int n = 0;
      auto look = [&](std::ptrdiff_t dx, std::ptrdiff_t dy) {
        const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(x) + dx;
        const std::ptrdiff_t ny = static_cast<std::ptrdiff_t>(y) + dy;
        if (nx < 0 || ny < 0 || nx >= static_cast<std::ptrdiff_t>(w)) return;
        const std::uint32_t l = out.labels[static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx)];
        if (l != 0) neighbours[n++] = l;
      };
      look(-1, 0);
      look(0, -1);
      if (connectivity == Connectivity::Eight) {
        look(-1, -1);
        look(1, -1);
      }
      std::uint32_t label;
      if (n == 0) {
        label = sets.add();
      } else {
        label = *std::min_element(neighbours, neighbours + n);
        for (int i = 0; i < n; ++i) sets.unite(label, neighbours[i]);
      }
      out.labels[y * w + x] = label;
    }
  }

  // Second pass: resolve roots and renumber densely in scan order.
  std::vector<std::uint32_t> remap;
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const std::uint32_t l = out.labels[i];
    if (l == 0) continue;
    const std::uint32_t root = sets.find(l);
    if (root >= remap.size()) remap.resize(root + 1, 0);
    if (remap[root] == 0) {
      remap[root] = ++out.component_count;
      out.areas.push_back(0);
    }
    out.labels[i] = remap[root];
    ++out.areas[remap[root] - 1];
  }
  return out;
}

std::vector<BBox> component_boxes(const ComponentLabeling& labeling) {
  const std::size_t n = labeling.component_count;
  std::vector<std::size_t> x0(n, labeling.width), y0(n, labeling.height), x1(n, 0), y1(n, 0);
  for (std::size_t y = 0; y < labeling.height; ++y) {
    for (std::size_t x = 0; x < labeling.width; ++x) {
      const std::uint32_t l = labeling.labels[y * labeling.width + x];
      if (l == 0) continue;
      const std::size_t k = l - 1;
      x0[k] = std::min(x0[k], x);
      y0[k] = std::min(y0[k], y);
      x1[k] = std::max(x1[k], x + 1);
      y1[k] = std::max(y1[k], y + 1);
    }
  }
  std::vector<BBox> boxes;
  boxes.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    boxes.emplace_back(static_cast<double>(x0[k]), static_cast<double>(y0[k]),
                       static_cast<double>(x1[k]), static_cast<double>(y1[k]));
  }
  return boxes;
}

std::vector<BBox> boxes_from_mask(const BinaryMask& mask, BoxMode mode, Connectivity connectivity) {
  const ComponentLabeling labeling = connected_components(mask, connectivity);
  if (labeling.component_count == 0) return {};
  std::vector<BBox> boxes = component_boxes(labeling);
  if (mode == BoxMode::AllComponents) return boxes;
  // max_element returns the first maximum, i.e. the smallest label.
  const auto largest = std::max_element(labeling.areas.begin(), labeling.areas.end());
  return {boxes[static_cast<std::size_t>(largest - labeling.areas.begin())]};
}

BinaryMask rasterize(const std::vector<BBox>& boxes, std::size_t width, std::size_t height) {
  BinaryMask mask(width, height);
  for (const BBox& b : boxes) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        if (b.contains_pixel(x, y)) mask.set(x, y);
      }
    }
  }
  return mask;
}

}  // namespace wsoleval
