#include "wsoleval/metrics.hpp"

#include <algorithm>

#include "wsoleval/error.hpp"
#include "wsoleval/parallel.hpp"

namespace wsoleval {

namespace {

void check_dataset(std::span<const MapSample> dataset) {
  if (dataset.empty()) throw ValidationError("evaluation dataset is empty");
  for (const auto& s : dataset) {
    if (s.boxes.empty()) throw ValidationError("image '" + s.image_id + "' has no reference boxes");
  }
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("IoU cutoff delta must lie in (0,1)");
}

double sample_score(const MapSample& s, double tau, const ExtractionOptions& options) {
  const auto boxes = predicted_boxes(s.map, tau, options);
  return image_loc_score(boxes, s.boxes);
}

}  // namespace

const char* to_string(BoxMode mode) {
  return mode == BoxMode::LargestComponent ? "largest-component" : "all-components";
}

double image_loc_score(std::span<const BBox> predicted, std::span<const BBox> reference) {
  if (reference.empty()) throw ValidationError("image has no reference boxes");
  double best = 0.0;
  for (const auto& p : predicted) {
    for (const auto& r : reference) best = std::max(best, iou(p, r));
  }
  return best;
}

std::vector<BBox> predicted_boxes(const NormalizedLocMap& map, double tau,
                                  const ExtractionOptions& options) {
  return boxes_from_mask(binarize(map, tau), options.mode, options.connectivity);
}

std::vector<std::vector<double>> iou_table(std::span<const MapSample> dataset,
                                           const ThresholdGrid& grid,
                                           const ExtractionOptions& options) {
  check_dataset(dataset);
  std::vector<std::vector<double>> table(dataset.size());
  parallel_for(dataset.size(), options.threads, [&](std::size_t i) {
    auto& row = table[i];
    row.resize(grid.size());
    for (std::size_t t = 0; t < grid.size(); ++t) row[t] = sample_score(dataset[i], grid[t], options);
  });
  return table;
}

BoxAccCurve box_acc_curve(std::span<const MapSample> dataset, const ThresholdGrid& grid,
                          double delta, const ExtractionOptions& options) {
  check_delta(delta);
  const auto table = iou_table(dataset, grid, options);
  BoxAccCurve curve{grid, std::vector<double>(grid.size(), 0.0), delta};
  for (std::size_t t = 0; t < grid.size(); ++t) {
    std::size_t hits = 0;
    for (const auto& row : table) hits += row[t] >= delta ? 1 : 0;
    curve.acc[t] = static_cast<double>(hits) / static_cast<double>(table.size());
  }
  return curve;
}

std::pair<double, double> max_box_acc(const BoxAccCurve& curve) {
  if (curve.acc.empty() || curve.acc.size() != curve.grid.size()) {
    throw InvalidArgument("curve length does not match its threshold grid");
  }
  std::size_t best = 0;
  for (std::size_t t = 1; t < curve.acc.size(); ++t) {
    if (curve.acc[t] > curve.acc[best]) best = t;
  }
  return {curve.grid[best], curve.acc[best]};
}

double mean_iou_at(std::span<const MapSample> dataset, double tau, const ExtractionOptions& options) {
  check_dataset(dataset);
  std::vector<double> scores(dataset.size());
  parallel_for(dataset.size(), options.threads,
               [&](std::size_t i) { scores[i] = sample_score(dataset[i], tau, options); });
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(dataset.size());
}

EvalResult evaluate_at(std::span<const MapSample> dataset, double tau, double delta,
                       const ExtractionOptions& options) {
  check_delta(delta);
  check_dataset(dataset);
  std::vector<double> scores(dataset.size());
  parallel_for(dataset.size(), options.threads,
               [&](std::size_t i) { scores[i] = sample_score(dataset[i], tau, options); });
  EvalResult result;
  result.tau_star = tau;
  result.delta = delta;
  result.mode = options.mode;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const bool hit = scores[i] >= delta;
    result.per_image.push_back({dataset[i].image_id, scores[i], hit});
    sum += scores[i];
    hits += hit ? 1 : 0;
  }
  result.max_box_acc = static_cast<double>(hits) / static_cast<double>(dataset.size());
  result.mean_iou_at_tau = sum / static_cast<double>(dataset.size());
  return result;
}

EvalResult evaluate(std::span<const MapSample> dataset, const ThresholdGrid& grid, double delta,
                    const ExtractionOptions& options) {
  const BoxAccCurve curve = box_acc_curve(dataset, grid, delta, options);
  const auto [tau_star, acc] = max_box_acc(curve);
  EvalResult result = evaluate_at(dataset, tau_star, delta, options);
  result.max_box_acc = acc;
  return result;
}

std::vector<MapSample> samples_for_source(std::span<const AnnotatedImage> images,
                                          const std::string& source) {
  std::vector<MapSample> samples;
  samples.reserve(images.size());
  for (const auto& img : images) {
    const auto it = img.annotations.find(source);
    if (it == img.annotations.end() || it->second.empty()) {
      throw ValidationError("image '" + img.image_id + "' has no boxes from annotation source '" +
                            source + "'");
    }
    samples.push_back({img.image_id, img.map, it->second});
  }
  return samples;
}

double eval_measure(std::span<const AnnotatedImage> images, const std::string& source,
                    const MeasureSpec& measure, const TauPolicy& policy,
                    const ExtractionOptions& options) {
  if (measure.measure == Measure::IouAtDelta) check_delta(measure.delta);
  const std::vector<MapSample> samples = samples_for_source(images, source);
  check_dataset(samples);
  const double n = static_cast<double>(samples.size());

  auto value_of = [&](double iou_value) {
    if (measure.measure == Measure::RawIou) return iou_value;
    return iou_value >= measure.delta ? 1.0 : 0.0;
  };
  auto mean_at = [&](double tau) {
    std::vector<double> scores(samples.size());
    parallel_for(samples.size(), options.threads,
                 [&](std::size_t i) { scores[i] = sample_score(samples[i], tau, options); });
    double sum = 0.0;
    for (double s : scores) sum += value_of(s);
    return sum / n;
  };

  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FixedTau> || std::is_same_v<P, EstimatedTau>) {
          return mean_at(p.tau);
        } else if constexpr (std::is_same_v<P, SweepTau>) {
          const auto table = iou_table(samples, p.grid, options);
          double best = 0.0;
          for (std::size_t t = 0; t < p.grid.size(); ++t) {
            double sum = 0.0;
            for (const auto& row : table) sum += value_of(row[t]);
            best = std::max(best, sum / n);
          }
          return best;
        } else {
          std::vector<double> scores(samples.size(), 0.0);
          parallel_for(samples.size(), options.threads, [&](std::size_t i) {
            // A degenerate map has no Otsu split; it predicts nothing.
            if (samples[i].map.degenerate()) return;
            const double tau = otsu_threshold(samples[i].map, p.bins);
            scores[i] = sample_score(samples[i], tau, options);
          });
          double sum = 0.0;
          for (double s : scores) sum += value_of(s);
          return sum / n;
        }
      },
      policy);
}

PointingOutcome pointing_game(const NormalizedLocMap& map, std::span<const BBox> boxes) {
  if (boxes.empty()) throw ValidationError("pointing game needs at least one box");
  if (map.degenerate()) return {false, true};
  const std::size_t peak = map.argmax();
  const std::size_t col = peak % map.width();
  const std::size_t row = peak / map.width();
  for (const auto& b : boxes) {
    if (b.contains_pixel(col, row)) return {true, false};
  }
  return {false, false};
}

PointingSummary pointing_accuracy(std::span<const MapSample> dataset) {
  PointingSummary summary;
  for (const auto& s : dataset) {
    const PointingOutcome o = pointing_game(s.map, s.boxes);
    if (o.hit) ++summary.hits; else ++summary.misses;
    if (o.degenerate) ++summary.degenerate;
  }
  const std::size_t total = summary.hits + summary.misses;
  summary.accuracy = total == 0 ? 0.0 : static_cast<double>(summary.hits) / static_cast<double>(total);
  return summary;
}

}  // namespace wsoleval
