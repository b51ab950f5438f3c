#pragma once

// Synthetic data generators shared by unit and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "wsoleval/geometry.hpp"
#include "wsoleval/heatmap.hpp"
#include "wsoleval/metrics.hpp"
#include "wsoleval/proposals.hpp"
#include "wsoleval/selection.hpp"

namespace wsoleval::fixtures {

inline BBox random_int_box(std::mt19937_64& rng, int w, int h, int min_side = 1) {
  std::uniform_int_distribution<int> xs(0, w - min_side);
  std::uniform_int_distribution<int> ys(0, h - min_side);
  const int x0 = xs(rng);
  const int y0 = ys(rng);
  std::uniform_int_distribution<int> ws(min_side, w - x0);
  std::uniform_int_distribution<int> hs(min_side, h - y0);
  return BBox(x0, y0, x0 + ws(rng), y0 + hs(rng));
}

/// 1 inside the boxes, 0 elsewhere.
inline NormalizedLocMap indicator_map(std::size_t w, std::size_t h, const std::vector<BBox>& boxes) {
  std::vector<double> v(w * h, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (const auto& b : boxes) {
        if (b.contains_pixel(x, y)) v[y * w + x] = 1.0;
      }
    }
  }
  return normalize(LocMap(w, h, std::move(v)));
}

/// Anisotropic Gaussian roughly covering `box`, displaced by `offset`
/// (fraction of the box size), plus uniform noise of amplitude `noise`.
inline NormalizedLocMap gaussian_blob_map(std::size_t w, std::size_t h, const BBox& box, std::mt19937_64& rng,
                                          double offset = 0.0, double spread = 0.5, double noise = 0.05) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double angle = unit(rng) * 6.283185307179586;
  const double cx = 0.5 * (box.x_min() + box.x_max()) + offset * box.width() * std::cos(angle);
  const double cy = 0.5 * (box.y_min() + box.y_max()) + offset * box.height() * std::sin(angle);
  const double sx = std::max(0.5, spread * box.width());
  const double sy = std::max(0.5, spread * box.height());
  std::vector<double> v(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double dx = (static_cast<double>(x) + 0.5 - cx) / sx;
      const double dy = (static_cast<double>(y) + 0.5 - cy) / sy;
      v[y * w + x] = std::exp(-0.5 * (dx * dx + dy * dy)) + noise * unit(rng);
    }
  }
  return normalize(LocMap(w, h, std::move(v)));
}

/// Dataset of blob maps around one random box per image.
inline std::vector<MapSample> blob_dataset(std::size_t n, std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> off(0.0, 0.4);
  std::uniform_real_distribution<double> spread(0.3, 0.7);
  std::vector<MapSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const BBox gt = random_int_box(rng, static_cast<int>(w), static_cast<int>(h), 4);
    out.push_back({"img" + std::to_string(1000 + i),
                   gaussian_blob_map(w, h, gt, rng, off(rng), spread(rng), 0.1), {gt}});
  }
  return out;
}

/// 8x8 blocks of random color with per-pixel jitter.
inline RgbImage random_blocks(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> c(0, 255);
  std::uniform_int_distribution<int> jitter(-6, 6);
  const std::size_t block = 8;
  const std::size_t bw = (w + block - 1) / block;
  const std::size_t bh = (h + block - 1) / block;
  std::vector<std::array<int, 3>> colors;
  for (std::size_t i = 0; i < bw * bh; ++i) colors.push_back({c(rng), c(rng), c(rng)});
  std::vector<std::uint8_t> px;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto& col = colors[(y / block) * bw + x / block];
      for (int ch = 0; ch < 3; ++ch) {
        px.push_back(static_cast<std::uint8_t>(std::clamp(col[static_cast<std::size_t>(ch)] + jitter(rng), 0, 255)));
      }
    }
  }
  return RgbImage(w, h, std::move(px));
}

/// Suite of runs with directly synthesized curves on a uniform grid.
/// Test oracle curves are random bumps; validation curves for `source` are a
/// noisy copy (noise 0 makes them identical to the test curves).
inline std::vector<RunManifest> synthetic_run_suite(std::size_t runs, std::size_t epochs, std::size_t grid,
                                                    std::uint64_t seed, double val_noise,
                                                    const std::string& source = "ss") {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<RunManifest> out;
  for (std::size_t r = 0; r < runs; ++r) {
    RunManifest run;
    run.run_id = "run" + std::to_string(100 + r);
    run.config["lr"] = std::to_string(unit(rng));
    run.grid = ThresholdGrid::uniform(grid).values();
    const double peak_epoch = 2.0 + unit(rng) * static_cast<double>(epochs);
    const double height = 0.4 + 0.5 * unit(rng);
    for (std::size_t e = 0; e < epochs; ++e) {
      const double de = (static_cast<double>(e) - peak_epoch) / 3.0;
      const double quality = height * std::exp(-0.5 * de * de);
      const double tau_peak = 0.2 + 0.6 * unit(rng);
      EpochRecord test;
      test.epoch = static_cast<int>(e);
      test.classification_acc = std::min(1.0, 0.3 + 0.04 * static_cast<double>(e) + 0.05 * unit(rng));
      std::vector<double> curve(grid);
      for (std::size_t k = 0; k < grid; ++k) {
        const double dt = (run.grid[k] - tau_peak) / 0.2;
        curve[k] = std::clamp(quality * std::exp(-0.5 * dt * dt) + 0.02 * unit(rng), 0.0, 1.0);
      }
      test.curves["oracle"] = curve;
      test.otsu_scores["oracle"] = std::clamp(quality * (0.6 + 0.3 * unit(rng)), 0.0, 1.0);
      EpochRecord val = test;
      val.classification_acc = std::clamp(test.classification_acc + 0.02 * (unit(rng) - 0.5), 0.0, 1.0);
      std::vector<double> val_curve = curve;
      if (val_noise > 0.0) {
        for (double& v : val_curve) v = std::clamp(v + val_noise * (unit(rng) - 0.5), 0.0, 1.0);
      }
      val.curves.clear();
      val.otsu_scores.clear();
      val.curves[source] = val_curve;
      val.curves["oracle"] = val_curve;
      run.val.push_back(std::move(val));
      run.test.push_back(std::move(test));
    }
    out.push_back(std::move(run));
  }
  return out;
}

}  // namespace wsoleval::fixtures
