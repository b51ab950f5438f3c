#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wsoleval/geometry.hpp"

namespace wsoleval {

/// Noise level 1..10; the deformation bound is 5% per level.
class NoiseSpec {
 public:
  NoiseSpec(int level, std::uint64_t seed);
  /// Level 0: no deformation at all. Only for calibration and tests.
  static NoiseSpec identity(std::uint64_t seed = 0);

  int level() const { return level_; }
  std::uint64_t seed() const { return seed_; }
  /// Maximum relative deformation d in [0, 0.5].
  double max_deformation() const { return 0.05 * level_; }

 private:
  NoiseSpec(int level, std::uint64_t seed, bool);
  int level_;
  std::uint64_t seed_;
};

struct PerturbSteps {
  bool scale = true;
  bool shift = true;
  bool aspect = true;
};

/// Random stream for one box. std::mt19937_64 seeded through std::seed_seq
/// with (seed, FNV-1a(image_id), box index); doubles are formed from the top
/// 53 bits. Both are fully specified by the standard, so streams are
/// identical on every platform and independent of evaluation order.
class BoxRng {
 public:
  BoxRng(std::uint64_t seed, const std::string& image_id, std::uint64_t box_index);
  /// Uniform in [0, 1).
  double unit();
  /// Uniform in [-bound, bound).
  double symmetric(double bound) { return (2.0 * unit() - 1.0) * bound; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(const std::string& text);

/// Scale each side by 1+u, shift the center by (sx*w, sy*h), and with
/// probability d apply an area-preserving aspect change (w *= 1+v, h /= 1+v);
/// u, sx, sy, v ~ U(-d, d). The result is clamped to the image with a 1x1
/// minimum. Six draws are consumed per box regardless of which steps run.
BBox perturb_box(const BBox& box, const NoiseSpec& spec, int image_width, int image_height,
                 BoxRng& rng, const PerturbSteps& steps = {});

struct GtBox {
  std::string image_id;
  BBox box;
  int image_width;
  int image_height;
};

struct PerturbSummary {
  int level = 0;
  std::size_t count = 0;
  std::optional<double> mean_iou;  // unset for empty input
};

struct PerturbedDataset {
  std::vector<GtBox> boxes;
  PerturbSummary summary;
};

/// One perturbed box per input box. The stream for each box is derived from
/// (seed, image_id, index of the box within its image), so results do not
/// depend on `threads`.
PerturbedDataset perturb_dataset(std::span<const GtBox> boxes, const NoiseSpec& spec,
                                 unsigned threads = 1, const PerturbSteps& steps = {});

}  // namespace wsoleval
