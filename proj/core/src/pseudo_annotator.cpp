#include "wsoleval/pseudo_annotator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wsoleval/error.hpp"
#include "wsoleval/parallel.hpp"

namespace wsoleval {

namespace {

double rank_value(const ScoredProposal& p, RankKey key) {
  if (key == RankKey::Objectness) return p.objectness;
  return p.classifier_score.value_or(-std::numeric_limits<double>::infinity());
}

}  // namespace

std::vector<ScoredProposal> top_fraction_filter(std::span<const ScoredProposal> proposals,
                                                double fraction, RankKey key) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("top fraction must lie in (0,1]");
  }
  if (proposals.empty()) return {};
  const std::size_t n = proposals.size();
  // The epsilon keeps exact products such as 0.2 * 10 from rounding up.
  const auto keep = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)), 1, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return rank_value(proposals[l], key) > rank_value(proposals[r], key);
  });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  std::vector<ScoredProposal> out;
  out.reserve(keep);
  for (std::size_t i : order) out.push_back(proposals[i]);
  return out;
}

std::vector<ScoredProposal> pointing_filter(std::span<const ScoredProposal> proposals,
                                            const NormalizedLocMap& cam) {
  if (cam.degenerate()) {
    throw ValidationError("CAM is constant so it has no peak; fall back to objectness-only ranking");
  }
  const std::size_t peak = cam.argmax();
  const std::size_t col = peak % cam.width();
  const std::size_t row = peak / cam.width();
  std::vector<ScoredProposal> out;
  for (const auto& p : proposals) {
    if (p.box.contains_pixel(col, row)) out.push_back(p);
  }
  return out;
}

double cam_mean(const NormalizedLocMap& cam, const BBox& box) {
  // Pixel (c, r) is inside when c + 0.5 lies in [x_min, x_max).
  const auto first = [](double lo) { return static_cast<std::ptrdiff_t>(std::ceil(lo - 0.5)); };
  const auto x0 = std::max<std::ptrdiff_t>(0, first(box.x_min()));
  const auto y0 = std::max<std::ptrdiff_t>(0, first(box.y_min()));
  const auto x1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(cam.width()), first(box.x_max()));
  const auto y1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(cam.height()), first(box.y_max()));
  if (x0 >= x1 || y0 >= y1) return 0.0;
  double sum = 0.0;
  for (auto y = y0; y < y1; ++y) {
    for (auto x = x0; x < x1; ++x) sum += cam.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
  }
  return sum / static_cast<double>((x1 - x0) * (y1 - y0));
}

RankedChoice classifier_rank(std::span<const ScoredProposal> proposals, const NormalizedLocMap& cam) {
  if (proposals.empty()) throw ValidationError("classifier ranking needs at least one proposal");
  const bool use_explicit = std::all_of(proposals.begin(), proposals.end(),
                                        [](const ScoredProposal& p) { return p.classifier_score.has_value(); });
  RankedChoice best{0, 0.0, use_explicit};
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const double s = use_explicit ? *proposals[i].classifier_score : cam_mean(cam, proposals[i].box);
    if (i == 0 || s > best.score ||
        (s == best.score && proposals[i].box.area() > proposals[best.index].box.area())) {
      best.index = i;
      best.score = s;
    }
  }
  return best;
}

BBox clip_map_to_box(const NormalizedLocMap& map, LargestBy largest_by, Connectivity connectivity) {
  if (map.degenerate()) throw ValidationError("no foreground: map is constant");
  const double tau = otsu_threshold(map);
  const ComponentLabeling labeling = connected_components(binarize(map, tau), connectivity);
  if (labeling.component_count == 0) throw ValidationError("no foreground after Otsu thresholding");
  const std::vector<BBox> boxes = component_boxes(labeling);
  std::size_t best = 0;
  for (std::size_t i = 1; i < boxes.size(); ++i) {
    const bool better = largest_by == LargestBy::BoxArea
                            ? boxes[i].area() > boxes[best].area()
                            : labeling.areas[i] > labeling.areas[best];
    if (better) best = i;
  }
  return boxes[best];
}

namespace {

AnnotationOutcome annotate_clip(const ImageRecord& record, const AnnotatorOptions& options) {
  if (!record.clip_map) {
    throw ValidationError("image '" + record.image_id + "' has no CLIP map");
  }
  const NormalizedLocMap& map = *record.clip_map;
  if (map.degenerate()) {
    throw ValidationError("image '" + record.image_id + "': no foreground, CLIP map is constant");
  }
  const double tau = otsu_threshold(map);
  const std::size_t components =
      connected_components(binarize(map, tau), options.connectivity).component_count;
  AnnotationOutcome out{record.image_id,
                        clip_map_to_box(map, options.largest_by, options.connectivity),
                        ProposalSource::CLIP,
                        1.0,
                        std::nullopt,
                        {}};
  out.classifier_score = cam_mean(map, out.box);
  out.trace = {components, components, components, components, 1, false, false};
  return out;
}

}  // namespace

AnnotationOutcome annotate(const ImageRecord& record, ProposalSource source,
                           const AnnotatorOptions& options) {
  if (source == ProposalSource::CLIP) return annotate_clip(record, options);
  if (record.proposals.empty()) {
    throw ValidationError("image '" + record.image_id + "' has no proposals");
  }
  if (!record.cam) throw ValidationError("image '" + record.image_id + "' has no CAM");
  const NormalizedLocMap& cam = *record.cam;

  const RankKey key = options.rank_key.value_or(source == ProposalSource::RPN ? RankKey::Objectness
                                                                              : RankKey::ClassifierScore);
  std::vector<ScoredProposal> ranked = record.proposals;
  if (key == RankKey::ClassifierScore) {
    // Missing classifier responses are filled with the CAM mean inside the box.
    for (auto& p : ranked) {
      if (!p.classifier_score) p.classifier_score = cam_mean(cam, p.box);
    }
  }

  StageTrace trace;
  trace.ingested = ranked.size();
  const std::vector<ScoredProposal> top = top_fraction_filter(ranked, options.fraction, key);
  trace.top_fraction = top.size();

  AnnotationOutcome out{record.image_id, top.front().box, source, 0.0, std::nullopt, {}};
  if (cam.degenerate()) {
    // No peak to point with: best objectness among the top-fraction survivors.
    trace.degenerate_cam = true;
    trace.fallback = true;
    trace.pointing = top.size();
    std::size_t best = 0;
    for (std::size_t i = 1; i < top.size(); ++i) {
      if (top[i].objectness > top[best].objectness) best = i;
    }
    out.box = top[best].box;
    out.objectness = top[best].objectness;
    out.classifier_score = top[best].classifier_score;
    trace.final_count = 1;
    out.trace = trace;
    return out;
  }

  std::vector<ScoredProposal> pointed = pointing_filter(top, cam);
  trace.pointing_hits = pointed.size();
  if (pointed.empty()) {
    trace.fallback = true;
    pointed = top;
  }
  trace.pointing = pointed.size();
  const RankedChoice choice = classifier_rank(pointed, cam);
  const ScoredProposal& chosen = pointed[choice.index];
  out.box = chosen.box;
  out.objectness = chosen.objectness;
  out.classifier_score = choice.score;
  trace.final_count = 1;
  out.trace = trace;
  return out;
}

DatasetAnnotation annotate_dataset(std::span<const ImageRecord> records, ProposalSource source,
                                   const AnnotatorOptions& options, unsigned threads) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return records[l].image_id < records[r].image_id;
  });
  std::vector<std::optional<AnnotationOutcome>> outcomes(records.size());
  std::vector<std::string> errors(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    try {
      outcomes[i] = annotate(records[order[i]], source, options);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  DatasetAnnotation result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (outcomes[i]) {
      if (outcomes[i]->trace.fallback) ++result.fallback_count;
      result.outcomes.push_back(std::move(*outcomes[i]));
    } else {
      result.errors.push_back({records[order[i]].image_id, errors[i]});
    }
  }
  return result;
}

}  // namespace wsoleval
