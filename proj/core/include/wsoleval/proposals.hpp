#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wsoleval/geometry.hpp"

namespace wsoleval {

enum class ProposalSource { SS, RPN, CLIP };

const char* to_string(ProposalSource source);
/// Parses "ss", "rpn" or "clip"; throws ValidationError otherwise.
ProposalSource parse_proposal_source(const std::string& text);

struct ScoredProposal {
  BBox box;
  double objectness;
  std::optional<double> classifier_score;

  friend bool operator==(const ScoredProposal&, const ScoredProposal&) = default;
};

/// 8-bit interleaved RGB image, row-major.
class RgbImage {
 public:
  RgbImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> rgb);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return width_ * height_; }
  std::uint8_t at(std::size_t col, std::size_t row, std::size_t channel) const {
    return rgb_[(row * width_ + col) * 3 + channel];
  }
  const std::vector<std::uint8_t>& data() const { return rgb_; }

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> rgb_;
};

inline constexpr std::size_t kColorBins = 25;
inline constexpr std::size_t kTextureOrientations = 8;
inline constexpr std::size_t kTextureBins = 10;
inline constexpr std::size_t kColorHistSize = 3 * kColorBins;
inline constexpr std::size_t kTextureHistSize = 3 * kTextureOrientations * kTextureBins;

/// A region of a segmentation with the features Selective Search compares.
/// Both histograms are L1-normalized.
struct Region {
  std::size_t area = 0;
  BBox box{0, 0, 1, 1};
  std::vector<double> color_hist;
  std::vector<double> texture_hist;
};

struct Segmentation {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint32_t> labels;  // dense ids 1..region_count, scan order
  std::uint32_t region_count = 0;
  std::vector<Region> regions;  // regions[id - 1]
};

/// Graph-based segmentation over 8-neighbour pixel pairs weighted by RGB
/// Euclidean distance. Edges are processed in ascending weight (stable, so
/// ties keep pixel-index order), followed by a pass that absorbs regions
/// smaller than `min_size`.
Segmentation felzenszwalb_segment(const RgbImage& image, double k, std::size_t min_size);

/// Pairs (a, b), a < b, of region ids sharing an 8-neighbour pixel edge.
std::vector<std::pair<std::uint32_t, std::uint32_t>> region_adjacency(const Segmentation& seg);

struct SimilarityWeights {
  double color = 1.0;
  double texture = 1.0;
  double size = 1.0;
  double fill = 1.0;
};

struct SimilarityTerms {
  double color;
  double texture;
  double size;
  double fill;
};

SimilarityTerms similarity_terms(const Region& a, const Region& b, std::size_t image_area);
double similarity(const Region& a, const Region& b, std::size_t image_area,
                  const SimilarityWeights& weights = {});

/// Region formed by merging two regions: summed area, union box,
/// area-weighted histograms.
Region merge_regions(const Region& a, const Region& b);

struct MergeEvent {
  std::uint32_t first;   // smaller id of the merged pair
  std::uint32_t second;  // larger id
  std::uint32_t merged;  // id of the new region (initial count + step)
  double similarity;
};

struct GroupingResult {
  std::vector<MergeEvent> merges;
  std::vector<ScoredProposal> proposals;  // deduplicated, highest objectness first
};

using SimilarityFn = std::function<double(const Region&, const Region&)>;

/// Greedy hierarchical grouping. Each step merges the adjacent pair with the
/// highest similarity (ties to the lexicographically smallest id pair) until
/// one region per connected group remains. Proposal objectness is the
/// normalized rank in (0,1]: initial regions take ranks 1..n in a seeded
/// shuffle, merges follow in order, so the final merge scores 1.
GroupingResult group_regions(std::vector<Region> regions,
                             const std::vector<std::pair<std::uint32_t, std::uint32_t>>& adjacency,
                             const SimilarityFn& similarity_fn, std::uint64_t seed = 0);

GroupingResult hierarchical_group(const Segmentation& seg, const SimilarityWeights& weights = {},
                                  std::uint64_t seed = 0);

struct SelectiveSearchParams {
  double k = 300.0;
  std::size_t min_size = 100;
  SimilarityWeights weights;
  std::uint64_t seed = 0;
};

std::vector<ScoredProposal> selective_search(const RgbImage& image,
                                             const SelectiveSearchParams& params = {});

/// Proposals for every image, computed on `threads` workers. Output order
/// follows input order and is independent of the worker count.
std::vector<std::vector<ScoredProposal>> selective_search_all(const std::vector<RgbImage>& images,
                                                              const SelectiveSearchParams& params,
                                                              unsigned threads);

struct ProposalSet {
  std::string image_id;
  ProposalSource source = ProposalSource::SS;
  std::vector<ScoredProposal> proposals;
};

struct IngestIssue {
  std::size_t line;  // 1-based
  std::string message;
};

struct IngestReport {
  std::vector<ProposalSet> images;  // sorted by image id
  std::vector<IngestIssue> issues;
  bool ok() const { return issues.empty(); }
};

using ImageDimsLookup =
    std::function<std::optional<std::pair<int, int>>(const std::string& image_id)>;

/// Reads a proposals JSONL file. Boxes are clamped to image bounds when the
/// row carries image_width/image_height or `dims` knows the image. Invalid
/// rows are skipped and itemized with their line number. Duplicate boxes are
/// kept. Throws IoError if the file cannot be read.
IngestReport ingest_proposals(const std::string& path, const ImageDimsLookup& dims = {});

}  // namespace wsoleval
