#include "wsoleval/perturb.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "wsoleval/error.hpp"
#include "wsoleval/parallel.hpp"

namespace wsoleval {

NoiseSpec::NoiseSpec(int level, std::uint64_t seed) : level_(level), seed_(seed) {
  if (level < 1 || level > 10) throw InvalidArgument("noise level must lie in 1..10");
}

NoiseSpec::NoiseSpec(int level, std::uint64_t seed, bool) : level_(level), seed_(seed) {}

NoiseSpec NoiseSpec::identity(std::uint64_t seed) { return NoiseSpec(0, seed, true); }

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

BoxRng::BoxRng(std::uint64_t seed, const std::string& image_id, std::uint64_t box_index) {
  const std::uint64_t id = fnv1a64(image_id);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32),
                    static_cast<std::uint32_t>(box_index), static_cast<std::uint32_t>(box_index >> 32)};
  engine_.seed(seq);
}

double BoxRng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

BBox perturb_box(const BBox& box, const NoiseSpec& spec, int image_width, int image_height,
                 BoxRng& rng, const PerturbSteps& steps) {
  if (image_width < 1 || image_height < 1) throw InvalidArgument("image dimensions must be positive");
  const double d = spec.max_deformation();
  const double u_w = rng.symmetric(d);
  const double u_h = rng.symmetric(d);
  const double s_x = rng.symmetric(d);
  const double s_y = rng.symmetric(d);
  const double coin = rng.unit();
  const double v = rng.symmetric(d);

  if (d == 0.0) return clamp_box(box, image_width, image_height);

  double cx = 0.5 * (box.x_min() + box.x_max());
  double cy = 0.5 * (box.y_min() + box.y_max());
  double w = box.width();
  double h = box.height();
  if (steps.scale) {
    w *= 1.0 + u_w;
    h *= 1.0 + u_h;
  }
  if (steps.shift) {
    cx += s_x * w;
    cy += s_y * h;
  }
  if (steps.aspect && coin < d) {
    w *= 1.0 + v;
    h /= 1.0 + v;
  }
  // Clamp each axis to the image, then widen to 1 pixel where needed.
  auto axis = [](double center, double extent, int limit) {
    const double size = static_cast<double>(limit);
    double lo = std::clamp(center - 0.5 * extent, 0.0, size);
    double hi = std::clamp(center + 0.5 * extent, 0.0, size);
    if (hi - lo < 1.0) {
      lo = std::clamp(std::min(lo, hi - 1.0), 0.0, size - 1.0);
      hi = lo + 1.0;
    }
    return std::pair{lo, hi};
  };
  const auto [x0, x1] = axis(cx, w, image_width);
  const auto [y0, y1] = axis(cy, h, image_height);
  return BBox(x0, y0, x1, y1);
}

PerturbedDataset perturb_dataset(std::span<const GtBox> boxes, const NoiseSpec& spec,
                                 unsigned threads, const PerturbSteps& steps) {
  // Index of each box among the boxes of its image, in file order.
  std::vector<std::uint64_t> index_in_image(boxes.size());
  std::map<std::string, std::uint64_t> seen;
  for (std::size_t i = 0; i < boxes.size(); ++i) index_in_image[i] = seen[boxes[i].image_id]++;

  PerturbedDataset out;
  out.boxes.reserve(boxes.size());
  for (const auto& b : boxes) out.boxes.push_back(b);
  parallel_for(boxes.size(), threads, [&](std::size_t i) {
    BoxRng rng(spec.seed(), boxes[i].image_id, index_in_image[i]);
    out.boxes[i].box = perturb_box(boxes[i].box, spec, boxes[i].image_width, boxes[i].image_height,
                                   rng, steps);
  });
  out.summary.level = spec.level();
  out.summary.count = boxes.size();
  if (!boxes.empty()) {
    double sum = 0.0;
    for (std::size_t i = 0; i < boxes.size(); ++i) sum += iou(boxes[i].box, out.boxes[i].box);
    out.summary.mean_iou = sum / static_cast<double>(boxes.size());
  }
  return out;
}

}  // namespace wsoleval
