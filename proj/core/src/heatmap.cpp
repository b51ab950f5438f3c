#include "wsoleval/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wsoleval/error.hpp"

namespace wsoleval {

LocMap::LocMap(std::size_t width, std::size_t height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width == 0 || height == 0) throw InvalidArgument("map dimensions must be positive");
  if (values_.size() != width * height) {
    throw InvalidArgument("map value count does not match width x height");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("map contains a non-finite value");
  }
}

NormalizedLocMap::NormalizedLocMap(std::size_t width, std::size_t height,
                                   std::vector<double> values, bool degenerate)
    : width_(width), height_(height), values_(std::move(values)), degenerate_(degenerate) {}

NormalizedLocMap NormalizedLocMap::from_unit_values(std::size_t width, std::size_t height,
                                                    std::vector<double> values) {
  if (width == 0 || height == 0) throw InvalidArgument("map dimensions must be positive");
  if (values.size() != width * height) {
    throw InvalidArgument("map value count does not match width x height");
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("normalized map value outside [0,1]");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const bool degenerate = *lo == *hi;
  return NormalizedLocMap(width, height, std::move(values), degenerate);
}

std::size_t NormalizedLocMap::argmax() const {
  return static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) -
                                  values_.begin());
}

NormalizedLocMap normalize(const LocMap& map) {
  const auto& v = map.values();
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(v.size(), 0.0);
  if (lo == hi) return NormalizedLocMap(map.width(), map.height(), std::move(out), true);
  const double range = hi - lo;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::clamp((v[i] - lo) / range, 0.0, 1.0);
  }
  // Pin the extremes so min is exactly 0 and max exactly 1.
  out[static_cast<std::size_t>(lo_it - v.begin())] = 0.0;
  out[static_cast<std::size_t>(hi_it - v.begin())] = 1.0;
  return NormalizedLocMap(map.width(), map.height(), std::move(out), false);
}

BinaryMask binarize(const NormalizedLocMap& map, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw InvalidArgument("binarization threshold must lie in [0,1]");
  }
  std::vector<std::uint8_t> bits(map.size());
  const auto& v = map.values();
  for (std::size_t i = 0; i < v.size(); ++i) bits[i] = v[i] >= tau ? 1 : 0;
  return BinaryMask(map.width(), map.height(), std::move(bits));
}

ThresholdGrid ThresholdGrid::uniform(std::size_t count) {
  if (count == 0) throw InvalidArgument("threshold grid needs at least one point");
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) t[i] = static_cast<double>(i) / static_cast<double>(count);
  return ThresholdGrid(std::move(t));
}

ThresholdGrid ThresholdGrid::from_values(std::vector<double> thresholds) {
  if (thresholds.empty()) throw InvalidArgument("threshold grid needs at least one point");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0 && thresholds[i] < 1.0)) {
      throw InvalidArgument("grid thresholds must lie in [0,1)");
    }
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw InvalidArgument("grid thresholds must be strictly increasing");
    }
  }
  return ThresholdGrid(std::move(thresholds));
}

std::size_t histogram_bin(double value, std::size_t bins) {
  const auto b = static_cast<std::size_t>(std::floor(value * static_cast<double>(bins)));
  return std::min(b, bins - 1);
}

namespace {

using u128 = unsigned __int128;

// Between-class variance of split k, up to the positive factor 1/N^2:
// (N*S0 - N0*S)^2 / (N0 * N1), with bin indices as sample values.
struct SplitScore {
  u128 numerator;
  u128 denominator;
};

}  // namespace

double otsu_threshold(const NormalizedLocMap& map, std::size_t bins) {
  if (bins < 2) throw InvalidArgument("Otsu needs at least two histogram bins");
  if (map.degenerate()) throw ValidationError("constant map has no Otsu threshold");

  std::vector<std::uint64_t> hist(bins, 0);
  for (double v : map.values()) ++hist[histogram_bin(v, bins)];

  const std::uint64_t total_n = map.size();
  std::uint64_t total_s = 0;
  for (std::size_t i = 0; i < bins; ++i) total_s += hist[i] * i;

  // Exact integer comparison is safe while numerator * denominator fits in
  // 128 bits: N^6 * bins^2 / 4 < 2^127.
  const long double n_ld = static_cast<long double>(total_n);
  const long double bound = std::pow(n_ld, 6.0L) * static_cast<long double>(bins) *
                            static_cast<long double>(bins) / 4.0L;
  const bool exact = bound < std::ldexp(1.0L, 126);

  std::size_t best_k = 0;
  SplitScore best{0, 1};
  long double best_approx = -1.0L;

  std::uint64_t n0 = 0;
  std::uint64_t s0 = 0;
  for (std::size_t k = 1; k < bins; ++k) {
    n0 += hist[k - 1];
    s0 += hist[k - 1] * (k - 1);
    const std::uint64_t n1 = total_n - n0;
    if (n0 == 0 || n1 == 0) continue;
    const __int128 diff = static_cast<__int128>(total_n) * s0 - static_cast<__int128>(n0) * total_s;
    const u128 mag = static_cast<u128>(diff < 0 ? -diff : diff);
    if (exact) {
      const SplitScore cur{mag * mag, static_cast<u128>(n0) * n1};
      if (best_k == 0 || cur.numerator * best.denominator > best.numerator * cur.denominator) {
        best = cur;
        best_k = k;
      }
    } else {
      const long double m = static_cast<long double>(mag);
      const long double cur = m * m / (static_cast<long double>(n0) * static_cast<long double>(n1));
      if (best_k == 0 || cur > best_approx) {
        best_approx = cur;
        best_k = k;
      }
    }
  }
  if (best_k == 0) {
    throw ValidationError("map has no Otsu threshold: every value falls in one histogram bin");
  }
  return static_cast<double>(best_k) / static_cast<double>(bins);
}

}  // namespace wsoleval
