#include <random>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "wsoleval/error.hpp"
#include "wsoleval/pseudo_annotator.hpp"

namespace wsoleval {
namespace {

ScoredProposal prop(BBox b, double obj, std::optional<double> cls = std::nullopt) { return {b, obj, cls}; }

/// CAM with a single peak pixel at (px, py) on a faint ramp.
NormalizedLocMap peak_cam(std::size_t w, std::size_t h, std::size_t px, std::size_t py) {
  std::vector<double> v(w * h);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.001 * static_cast<double>(i % 7);
  v[py * w + px] = 10.0;
  return normalize(LocMap(w, h, std::move(v)));
}

TEST(TopFractionTest, Examples) {
  std::vector<ScoredProposal> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(prop(BBox(i, 0, i + 1, 1), 0.1 * i));
  const auto kept = top_fraction_filter(ten, 0.2);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].box, BBox(8, 0, 9, 1));
  EXPECT_EQ(kept[1].box, BBox(9, 0, 10, 1));

  const std::vector<ScoredProposal> one{prop(BBox(0, 0, 2, 2), 0.3)};
  EXPECT_EQ(top_fraction_filter(one, 0.2).size(), 1u);

  const std::vector<ScoredProposal> ties{prop(BBox(0, 0, 1, 1), 0.5), prop(BBox(1, 0, 2, 1), 0.5),
                                         prop(BBox(2, 0, 3, 1), 0.3)};
  const auto t = top_fraction_filter(ties, 0.34);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], ties[0]);
  EXPECT_EQ(t[1], ties[1]);

  EXPECT_TRUE(top_fraction_filter(std::vector<ScoredProposal>{}, 0.2).empty());
  EXPECT_THROW(top_fraction_filter(one, 0.0), InvalidArgument);
  EXPECT_THROW(top_fraction_filter(one, 1.5), InvalidArgument);
}

TEST(TopFractionTest, TieGoesToEarlierEntry) {
  const std::vector<ScoredProposal> p{prop(BBox(0, 0, 1, 1), 0.9), prop(BBox(1, 0, 2, 1), 0.5),
                                      prop(BBox(2, 0, 3, 1), 0.5), prop(BBox(3, 0, 4, 1), 0.5)};
  const auto kept = top_fraction_filter(p, 0.5);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[1], p[1]);
}

TEST(TopFractionTest, ClassifierKeyRanksMissingScoresLast) {
  const std::vector<ScoredProposal> p{prop(BBox(0, 0, 1, 1), 0.9), prop(BBox(1, 0, 2, 1), 0.1, -3.0)};
  const auto kept = top_fraction_filter(p, 0.5, RankKey::ClassifierScore);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0], p[1]);
}

TEST(PointingFilterTest, MatchesPointInBoxCheck) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t px = rng() % 20, py = rng() % 16;
    const auto cam = peak_cam(20, 16, px, py);
    std::vector<ScoredProposal> props;
    for (int i = 0; i < 12; ++i) props.push_back(prop(fixtures::random_int_box(rng, 20, 16), 0.5));
    std::vector<ScoredProposal> expected;
    for (const auto& p : props) {
      if (p.box.x_min() <= double(px) && double(px) < p.box.x_max() && p.box.y_min() <= double(py) &&
          double(py) < p.box.y_max())
        expected.push_back(p);
    }
    EXPECT_EQ(pointing_filter(props, cam), expected);
  }
}

TEST(PointingFilterTest, AllOrNothingAndDegenerate) {
  const auto cam = peak_cam(10, 10, 5, 5);
  const std::vector<ScoredProposal> around{prop(BBox(4, 4, 6, 6), 0.1), prop(BBox(0, 0, 10, 10), 0.2)};
  EXPECT_EQ(pointing_filter(around, cam).size(), 2u);
  const std::vector<ScoredProposal> away{prop(BBox(0, 0, 2, 2), 0.1)};
  EXPECT_TRUE(pointing_filter(away, cam).empty());
  const auto flat = normalize(LocMap(10, 10, std::vector<double>(100, 1.0)));
  EXPECT_THROW(pointing_filter(around, flat), ValidationError);
}

TEST(ClassifierRankTest, Examples) {
  const auto cam = peak_cam(10, 10, 1, 1);
  const std::vector<ScoredProposal> single{prop(BBox(3, 3, 5, 5), 0.4)};
  EXPECT_EQ(classifier_rank(single, cam).index, 0u);

  const std::vector<ScoredProposal> expl{prop(BBox(0, 0, 2, 2), 0.4, 0.1), prop(BBox(5, 5, 7, 7), 0.4, 0.9)};
  const auto c = classifier_rank(expl, cam);
  EXPECT_EQ(c.index, 1u);
  EXPECT_TRUE(c.explicit_score);
}

TEST(ClassifierRankTest, CamMeanOnHandComputedFixture) {
  // left half of a 4x2 map is 1, right half 0.5, corner pixel 0
  const std::vector<double> v{1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 0.5, 0.0};
  const auto cam = normalize(LocMap(4, 2, v));
  EXPECT_DOUBLE_EQ(cam_mean(cam, BBox(0, 0, 2, 2)), 1.0);
  EXPECT_DOUBLE_EQ(cam_mean(cam, BBox(2, 0, 4, 2)), (0.5 + 0.5 + 0.5 + 0.0) / 4.0);
  const std::vector<ScoredProposal> p{prop(BBox(2, 0, 4, 2), 0.9), prop(BBox(0, 0, 2, 2), 0.1)};
  const auto c = classifier_rank(p, cam);
  EXPECT_EQ(c.index, 1u);
  EXPECT_FALSE(c.explicit_score);
  EXPECT_DOUBLE_EQ(c.score, 1.0);
}

TEST(ClassifierRankTest, TiesPreferLargerBoxThenEarlier) {
  const auto cam = peak_cam(10, 10, 0, 0);
  const std::vector<ScoredProposal> p{prop(BBox(0, 0, 2, 2), 0.1, 0.5), prop(BBox(0, 0, 4, 4), 0.1, 0.5),
                                      prop(BBox(4, 4, 8, 8), 0.1, 0.5)};
  EXPECT_EQ(classifier_rank(p, cam).index, 1u);
  EXPECT_THROW(classifier_rank(std::vector<ScoredProposal>{}, cam), ValidationError);
}

TEST(ClipMapTest, Examples) {
  const auto rect = fixtures::indicator_map(30, 20, {BBox(4, 5, 14, 12)});
  EXPECT_EQ(clip_map_to_box(rect), BBox(4, 5, 14, 12));

  // 10x10 block at 0.8 and 5x5 block at 1.0, background 0
  std::vector<double> v(40 * 40, 0.0);
  for (int y = 2; y < 12; ++y)
    for (int x = 2; x < 12; ++x) v[y * 40 + x] = 0.8;
  for (int y = 25; y < 30; ++y)
    for (int x = 25; x < 30; ++x) v[y * 40 + x] = 1.0;
  const auto two = normalize(LocMap(40, 40, v));
  EXPECT_EQ(clip_map_to_box(two), BBox(2, 2, 12, 12));

  EXPECT_THROW(clip_map_to_box(normalize(LocMap(5, 5, std::vector<double>(25, 0.3)))), ValidationError);
}

TEST(ClipMapTest, LargestByPixelsDiffersFromBoxArea) {
  // thin diagonal line (big box, few pixels) versus a solid 4x4 block
  std::vector<double> v(30 * 30, 0.0);
  for (int i = 0; i < 12; ++i) v[i * 30 + i] = 1.0;
  for (int y = 24; y < 28; ++y)
    for (int x = 24; x < 28; ++x) v[y * 30 + x] = 1.0;
  const auto map = normalize(LocMap(30, 30, v));
  EXPECT_EQ(clip_map_to_box(map, LargestBy::BoxArea), BBox(0, 0, 12, 12));
  EXPECT_EQ(clip_map_to_box(map, LargestBy::ComponentPixels), BBox(24, 24, 28, 28));
}

TEST(AnnotateTest, SingleProposalContainingPeak) {
  ImageRecord r{"one", 0, {prop(BBox(2, 2, 8, 8), 0.7)}, peak_cam(10, 10, 5, 5), std::nullopt};
  const auto out = annotate(r, ProposalSource::SS);
  EXPECT_EQ(out.box, BBox(2, 2, 8, 8));
  EXPECT_EQ(out.trace.ingested, 1u);
  EXPECT_EQ(out.trace.top_fraction, 1u);
  EXPECT_EQ(out.trace.pointing, 1u);
  EXPECT_EQ(out.trace.final_count, 1u);
  EXPECT_FALSE(out.trace.fallback);
}

TEST(AnnotateTest, TenProposalsStagedTrace) {
  std::vector<ScoredProposal> props;
  for (int i = 0; i < 8; ++i) props.push_back(prop(BBox(0, 0, 3, 3), 0.05 * i));
  props.push_back(prop(BBox(10, 10, 16, 16), 0.95));  // top, contains peak
  props.push_back(prop(BBox(0, 10, 5, 16), 0.9));     // top, misses peak
  ImageRecord r{"ten", 0, props, peak_cam(20, 20, 12, 12), std::nullopt};
  const auto out = annotate(r, ProposalSource::RPN);
  EXPECT_EQ(out.box, BBox(10, 10, 16, 16));
  const StageTrace expected{10, 2, 1, 1, 1, false, false};
  EXPECT_EQ(out.trace, expected);
}

TEST(AnnotateTest, FallbackWhenPointingEmptiesSet) {
  const std::vector<ScoredProposal> props{prop(BBox(0, 0, 4, 4), 0.9), prop(BBox(5, 0, 9, 4), 0.8),
                                          prop(BBox(0, 5, 4, 9), 0.1)};
  // peak at (15,15) lies outside every box; CAM mean favors the second box
  std::vector<double> v(20 * 20, 0.0);
  for (int y = 0; y < 4; ++y)
    for (int x = 5; x < 9; ++x) v[y * 20 + x] = 0.5;
  v[15 * 20 + 15] = 1.0;
  ImageRecord r{"fb", 0, props, normalize(LocMap(20, 20, v)), std::nullopt};
  AnnotatorOptions opt;
  opt.fraction = 0.5;
  opt.rank_key = RankKey::Objectness;
  const auto out = annotate(r, ProposalSource::SS, opt);
  EXPECT_TRUE(out.trace.fallback);
  EXPECT_EQ(out.trace.pointing_hits, 0u);
  EXPECT_EQ(out.trace.top_fraction, 2u);
  EXPECT_EQ(out.box, BBox(5, 0, 9, 4));
}

TEST(AnnotateTest, DegenerateCamFallsBackToObjectness) {
  const std::vector<ScoredProposal> props{prop(BBox(0, 0, 4, 4), 0.3), prop(BBox(5, 0, 9, 4), 0.8)};
  ImageRecord r{"flat", 0, props, normalize(LocMap(10, 10, std::vector<double>(100, 0.2))), std::nullopt};
  AnnotatorOptions opt;
  opt.fraction = 1.0;
  const auto out = annotate(r, ProposalSource::RPN, opt);
  EXPECT_TRUE(out.trace.degenerate_cam);
  EXPECT_TRUE(out.trace.fallback);
  EXPECT_EQ(out.box, BBox(5, 0, 9, 4));
}

TEST(AnnotateTest, ClipPath) {
  ImageRecord r{"clip", 0, {}, std::nullopt, fixtures::indicator_map(20, 20, {BBox(3, 3, 9, 9)})};
  const auto out = annotate(r, ProposalSource::CLIP);
  EXPECT_EQ(out.box, BBox(3, 3, 9, 9));
  EXPECT_EQ(out.source, ProposalSource::CLIP);
  EXPECT_EQ(out.trace.final_count, 1u);
}

TEST(AnnotateTest, InvariantsOnRandomRecords) {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredProposal> props;
    const int n = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      std::optional<double> cls;
      if (trial % 2) cls = unit(rng);
      props.push_back(prop(fixtures::random_int_box(rng, 24, 24), std::floor(unit(rng) * 5) / 5, cls));
    }
    const BBox gt = fixtures::random_int_box(rng, 24, 24, 3);
    ImageRecord r{"r" + std::to_string(trial), 0, props, fixtures::gaussian_blob_map(24, 24, gt, rng), std::nullopt};
    for (ProposalSource s : {ProposalSource::SS, ProposalSource::RPN}) {
      const auto a = annotate(r, s);
      const auto b = annotate(r, s);
      EXPECT_EQ(a.box, b.box);
      EXPECT_EQ(a.trace, b.trace);
      EXPECT_GE(a.trace.ingested, a.trace.top_fraction);
      EXPECT_GE(a.trace.top_fraction, a.trace.pointing);
      EXPECT_GE(a.trace.pointing, a.trace.final_count);
      EXPECT_EQ(a.trace.final_count, 1u);
      EXPECT_TRUE(std::any_of(props.begin(), props.end(), [&](const ScoredProposal& p) { return p.box == a.box; }));
    }
  }
}

TEST(AnnotateDatasetTest, ErrorsAggregatedInIdOrder) {
  std::vector<ImageRecord> records;
  records.push_back({"b", 0, {prop(BBox(0, 0, 5, 5), 0.5)}, peak_cam(8, 8, 1, 1), std::nullopt});
  records.push_back({"a", 0, {}, peak_cam(8, 8, 1, 1), std::nullopt});
  records.push_back({"c", 0, {prop(BBox(0, 0, 2, 2), 0.5)}, peak_cam(8, 8, 6, 6), std::nullopt});
  const auto result = annotate_dataset(records, ProposalSource::RPN, {}, 4);
  ASSERT_EQ(result.outcomes.size(), 2u);
  EXPECT_EQ(result.outcomes[0].image_id, "b");
  EXPECT_EQ(result.outcomes[1].image_id, "c");
  ASSERT_EQ(result.errors.size(), 1u);
  EXPECT_EQ(result.errors[0].image_id, "a");
  EXPECT_EQ(result.fallback_count, 1u);
  EXPECT_DOUBLE_EQ(result.fallback_rate(), 0.5);
}

}  // namespace
}  // namespace wsoleval
