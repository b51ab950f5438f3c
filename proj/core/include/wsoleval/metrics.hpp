#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wsoleval/geometry.hpp"
#include "wsoleval/heatmap.hpp"

namespace wsoleval {

/// One evaluation image: its normalized map and the reference boxes it is
/// scored against (oracle or pseudo).
struct MapSample {
  std::string image_id;
  NormalizedLocMap map;
  std::vector<BBox> boxes;
};

struct ExtractionOptions {
  BoxMode mode = BoxMode::AllComponents;
  Connectivity connectivity = Connectivity::Eight;
  unsigned threads = 1;
};

struct BoxAccCurve {
  ThresholdGrid grid;
  std::vector<double> acc;
  double delta = 0.5;
};

enum class Measure { IouAtDelta, RawIou };

struct LocScore {
  Measure measure;
  double value;
};

struct PerImageScore {
  std::string image_id;
  double iou;
  bool hit;  // iou >= delta at tau_star
};

struct EvalResult {
  double tau_star = 0.0;
  double max_box_acc = 0.0;
  double mean_iou_at_tau = 0.0;
  double delta = 0.5;
  BoxMode mode = BoxMode::AllComponents;
  std::vector<PerImageScore> per_image;
};

/// Best IoU over all (predicted, reference) pairs; 0 when nothing was
/// predicted. Throws ValidationError when `reference` is empty.
double image_loc_score(std::span<const BBox> predicted, std::span<const BBox> reference);

/// Boxes extracted from `map` at `tau`.
std::vector<BBox> predicted_boxes(const NormalizedLocMap& map, double tau,
                                  const ExtractionOptions& options);

/// Per-image, per-threshold best IoU: table[image][grid index].
std::vector<std::vector<double>> iou_table(std::span<const MapSample> dataset,
                                           const ThresholdGrid& grid,
                                           const ExtractionOptions& options);

BoxAccCurve box_acc_curve(std::span<const MapSample> dataset, const ThresholdGrid& grid,
                          double delta, const ExtractionOptions& options = {});

/// Argmax of the curve, ties to the lowest tau. Returns (tau_star, acc).
std::pair<double, double> max_box_acc(const BoxAccCurve& curve);

/// Mean raw IoU at a fixed tau. Images with an empty mask contribute 0.
double mean_iou_at(std::span<const MapSample> dataset, double tau,
                   const ExtractionOptions& options = {});

/// Sweep the grid, pick tau_star, and report per-image scores there.
EvalResult evaluate(std::span<const MapSample> dataset, const ThresholdGrid& grid, double delta,
                    const ExtractionOptions& options = {});

/// Score the whole dataset at one externally chosen tau (fixed or estimated on
/// another split).
EvalResult evaluate_at(std::span<const MapSample> dataset, double tau, double delta,
                       const ExtractionOptions& options = {});

// How f(x)^b is derived from each map before scoring.
struct FixedTau {
  double tau;
};
struct EstimatedTau {
  double tau;  // estimated on another split, then applied as is
};
struct SweepTau {
  ThresholdGrid grid;
};
struct OtsuTau {
  std::size_t bins = 256;
};
using TauPolicy = std::variant<FixedTau, EstimatedTau, SweepTau, OtsuTau>;

struct MeasureSpec {
  Measure measure = Measure::IouAtDelta;
  double delta = 0.5;
};

/// Image with reference boxes keyed by annotation source ("oracle", "ss", ...).
struct AnnotatedImage {
  std::string image_id;
  NormalizedLocMap map;
  std::map<std::string, std::vector<BBox>> annotations;
};

/// Dataset-level localization measure: mean over images of the per-image
/// score against the boxes of `source`. Throws ValidationError naming the
/// first image that lacks `source` boxes.
double eval_measure(std::span<const AnnotatedImage> images, const std::string& source,
                    const MeasureSpec& measure, const TauPolicy& policy,
                    const ExtractionOptions& options = {});

/// Samples scored against the boxes of one annotation source.
std::vector<MapSample> samples_for_source(std::span<const AnnotatedImage> images,
                                          const std::string& source);

struct PointingOutcome {
  bool hit = false;
  bool degenerate = false;
};

/// Hit iff the map's argmax pixel (lowest row-major index on ties) lies in
/// any box. A degenerate map is a flagged miss.
PointingOutcome pointing_game(const NormalizedLocMap& map, std::span<const BBox> boxes);

struct PointingSummary {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t degenerate = 0;
  double accuracy = 0.0;
};

PointingSummary pointing_accuracy(std::span<const MapSample> dataset);

const char* to_string(BoxMode mode);

}  // namespace wsoleval
