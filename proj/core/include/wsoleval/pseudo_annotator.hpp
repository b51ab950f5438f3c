#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsoleval/geometry.hpp"
#include "wsoleval/heatmap.hpp"
#include "wsoleval/proposals.hpp"

namespace wsoleval {

enum class RankKey { Objectness, ClassifierScore };

/// Keeps the ceil(fraction * n) highest-scoring proposals, ties to the
/// earlier entry; survivors keep their input order. Proposals lacking a
/// classifier score rank last under RankKey::ClassifierScore.
std::vector<ScoredProposal> top_fraction_filter(std::span<const ScoredProposal> proposals,
                                                double fraction = 0.2,
                                                RankKey key = RankKey::Objectness);

/// Proposals whose box contains the CAM peak. Throws ValidationError for a
/// degenerate CAM: the caller should fall back to objectness ranking.
std::vector<ScoredProposal> pointing_filter(std::span<const ScoredProposal> proposals,
                                            const NormalizedLocMap& cam);

/// Mean CAM value over the pixels whose centers fall inside the box (0 if none).
double cam_mean(const NormalizedLocMap& cam, const BBox& box);

struct RankedChoice {
  std::size_t index;  // position in the input list
  double score;       // explicit classifier score or CAM mean
  bool explicit_score;
};

/// Picks the proposal with the highest classifier response. Explicit scores
/// are used when every proposal carries one, otherwise the CAM mean inside
/// each box. Ties go to the larger box, then the earlier entry.
RankedChoice classifier_rank(std::span<const ScoredProposal> proposals, const NormalizedLocMap& cam);

enum class LargestBy { BoxArea, ComponentPixels };

/// Otsu threshold, binarize, and return the largest connected-object box.
/// Throws ValidationError if the map is degenerate or nothing survives.
BBox clip_map_to_box(const NormalizedLocMap& map, LargestBy largest_by = LargestBy::BoxArea,
                     Connectivity connectivity = Connectivity::Eight);

/// Candidate counts after each refinement stage. When the pointing game
/// rejects every candidate, `fallback` is set, `pointing_hits` is 0 and
/// `pointing` reports the top-fraction survivors that went on to scoring.
struct StageTrace {
  std::size_t ingested = 0;
  std::size_t top_fraction = 0;
  std::size_t pointing = 0;
  std::size_t pointing_hits = 0;
  std::size_t final_count = 0;
  bool fallback = false;
  bool degenerate_cam = false;

  friend bool operator==(const StageTrace&, const StageTrace&) = default;
};

struct AnnotationOutcome {
  std::string image_id;
  BBox box;
  ProposalSource source;
  double objectness;
  std::optional<double> classifier_score;
  StageTrace trace;
};

/// Inputs for one image. ss/rpn need proposals and a CAM; clip needs clip_map.
struct ImageRecord {
  std::string image_id;
  int label = -1;
  std::vector<ScoredProposal> proposals;
  std::optional<NormalizedLocMap> cam;
  std::optional<NormalizedLocMap> clip_map;
};

struct AnnotatorOptions {
  double fraction = 0.2;
  /// Defaults: objectness for rpn, classifier score for ss (falls back to
  /// objectness when the proposals carry no classifier scores).
  std::optional<RankKey> rank_key;
  LargestBy largest_by = LargestBy::BoxArea;
  Connectivity connectivity = Connectivity::Eight;
};

/// ss/rpn: top fraction -> pointing game -> classifier response. clip: Otsu
/// box of the CLIP map. Throws ValidationError when the image has nothing to
/// annotate from.
AnnotationOutcome annotate(const ImageRecord& record, ProposalSource source,
                           const AnnotatorOptions& options = {});

struct AnnotationError {
  std::string image_id;
  std::string message;
};

struct DatasetAnnotation {
  std::vector<AnnotationOutcome> outcomes;  // image id order
  std::vector<AnnotationError> errors;      // image id order
  std::size_t fallback_count = 0;
  double fallback_rate() const {
    return outcomes.empty() ? 0.0
                            : static_cast<double>(fallback_count) / static_cast<double>(outcomes.size());
  }
};

DatasetAnnotation annotate_dataset(std::span<const ImageRecord> records, ProposalSource source,
                                   const AnnotatorOptions& options = {}, unsigned threads = 1);

}  // namespace wsoleval
