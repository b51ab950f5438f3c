#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "wsoleval/error.hpp"
#include "wsoleval/heatmap.hpp"

namespace wsoleval {
namespace {

NormalizedLocMap row_map(std::vector<double> v) {
  const std::size_t n = v.size();
  return normalize(LocMap(n, 1, std::move(v)));
}

NormalizedLocMap random_map(std::mt19937_64& rng, std::size_t w, std::size_t h) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Mixture of two or three clusters with random spreads.
  const int modes = 2 + static_cast<int>(rng() % 2);
  std::vector<double> centers, spreads;
  for (int m = 0; m < modes; ++m) {
    centers.push_back(unit(rng));
    spreads.push_back(0.02 + 0.2 * unit(rng));
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(w * h);
  for (auto& x : v) {
    const auto m = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(modes));
    x = centers[m] + spreads[m] * gauss(rng);
  }
  return normalize(LocMap(w, h, std::move(v)));
}

TEST(LocMapTest, RejectsBadInput) {
  EXPECT_THROW(LocMap(2, 2, {1, 2, 3}), InvalidArgument);
  EXPECT_THROW(LocMap(1, 1, {std::nan("")}), InvalidArgument);
  EXPECT_THROW(LocMap(0, 1, {}), InvalidArgument);
}

TEST(NormalizeTest, Examples) {
  EXPECT_EQ(row_map({0, 5, 10}).values(), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(row_map({-2, 0, 2}).values(), (std::vector<double>{0, 0.5, 1}));
  const auto constant = row_map({3, 3, 3});
  EXPECT_TRUE(constant.degenerate());
  EXPECT_EQ(constant.values(), (std::vector<double>{0, 0, 0}));
}

TEST(NormalizeTest, IdempotentAndAffineInvariant) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const auto m = random_map(rng, 9, 7);
    const auto again = normalize(LocMap(m.width(), m.height(), m.values()));
    EXPECT_EQ(again.values(), m.values());
    EXPECT_EQ(*std::min_element(m.values().begin(), m.values().end()), 0.0);
    EXPECT_EQ(*std::max_element(m.values().begin(), m.values().end()), 1.0);

    std::vector<double> scaled = m.values();
    for (auto& v : scaled) v = 3.5 * v - 7.0;
    const auto rescaled = normalize(LocMap(m.width(), m.height(), scaled));
    for (std::size_t k = 0; k < m.size(); ++k) EXPECT_NEAR(rescaled[k], m[k], 1e-12);
  }
}

TEST(NormalizedLocMapTest, UnitValuesAreValidated) {
  EXPECT_THROW(NormalizedLocMap::from_unit_values(2, 1, {0.2, 1.5}), InvalidArgument);
  EXPECT_TRUE(NormalizedLocMap::from_unit_values(2, 1, {0.4, 0.4}).degenerate());
  const auto m = NormalizedLocMap::from_unit_values(3, 1, {0.9, 0.1, 0.9});
  EXPECT_FALSE(m.degenerate());
  EXPECT_EQ(m.argmax(), 0u);  // first of the tied maxima
}

TEST(BinarizeTest, Examples) {
  const auto full = binarize(row_map({0, 0.3, 1}), 0.0);
  EXPECT_EQ(full.count(), 3u);
  const auto m = NormalizedLocMap::from_unit_values(3, 1, {0, 0.5, 1});
  const auto half = binarize(m, 0.5);
  EXPECT_FALSE(half[0]);
  EXPECT_TRUE(half[1]);
  EXPECT_TRUE(half[2]);
  const auto m2 = NormalizedLocMap::from_unit_values(3, 1, {0, 0.49, 1});
  const auto b2 = binarize(m2, 0.5);
  EXPECT_FALSE(b2[0]);
  EXPECT_FALSE(b2[1]);
  EXPECT_TRUE(b2[2]);
  EXPECT_THROW(binarize(m, 1.01), InvalidArgument);
  EXPECT_THROW(binarize(m, -0.01), InvalidArgument);
}

TEST(BinarizeTest, MonotoneInTau) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_map(rng, 12, 10);
    double t1 = static_cast<double>(rng() % 1000) / 1000.0;
    double t2 = static_cast<double>(rng() % 1000) / 1000.0;
    if (t1 > t2) std::swap(t1, t2);
    EXPECT_TRUE(binarize(m, t2).subset_of(binarize(m, t1)));
  }
}

TEST(ThresholdGridTest, UniformAndValidation) {
  const auto g = ThresholdGrid::uniform(1000);
  EXPECT_EQ(g.size(), 1000u);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[999], 0.999);
  EXPECT_THROW(ThresholdGrid::uniform(0), InvalidArgument);
  EXPECT_THROW(ThresholdGrid::from_values({0.1, 0.1}), InvalidArgument);
  EXPECT_THROW(ThresholdGrid::from_values({0.1, 1.0}), InvalidArgument);
  EXPECT_NO_THROW(ThresholdGrid::from_values({0.0, 0.25, 0.5}));
}

TEST(OtsuTest, PerfectlyBimodal) {
  std::vector<double> v(100, 0.1);
  std::fill(v.begin() + 50, v.end(), 0.9);
  const auto m = NormalizedLocMap::from_unit_values(10, 10, v);
  const double t = otsu_threshold(m);
  EXPECT_GT(t, 0.1);
  EXPECT_LE(t, 0.9);
  EXPECT_EQ(binarize(m, t).count(), 50u);
  // Lowest boundary that separates bin 25 from bin 230.
  EXPECT_DOUBLE_EQ(t, 26.0 / 256.0);
}

TEST(OtsuTest, ConstantMapIsAnError) {
  EXPECT_THROW(otsu_threshold(row_map({3, 3, 3})), ValidationError);
  EXPECT_THROW(otsu_threshold(NormalizedLocMap::from_unit_values(2, 1, {0.5, 0.501})), ValidationError);
}

TEST(OtsuTest, BetweenClassMaxEqualsIntraClassMinOnRandomMaps) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    const auto m = random_map(rng, 16, 16);
    for (std::size_t bins : {16u, 256u}) {
      EXPECT_EQ(otsu_threshold(m, bins), oracle::otsu_brute_force(m, bins));
    }
  }
}

TEST(OtsuTest, AffineRescalingOfRawMapDoesNotMove) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> raw(64);
    for (auto& v : raw) v = std::floor(unit(rng) * 64.0);  // exact under scaling by 2
    std::vector<double> scaled = raw;
    for (auto& v : scaled) v = 2.0 * v + 16.0;
    EXPECT_EQ(otsu_threshold(normalize(LocMap(8, 8, raw))), otsu_threshold(normalize(LocMap(8, 8, scaled))));
  }
}

}  // namespace
}  // namespace wsoleval
