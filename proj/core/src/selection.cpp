#include "wsoleval/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "wsoleval/error.hpp"

namespace wsoleval {

const char* to_string(Split split) { return split == Split::Val ? "val" : "test"; }

const char* to_string(ConfigAxis axis) {
  switch (axis) {
    case ConfigAxis::BT: return "BT";
    case ConfigAxis::BV: return "BV";
    case ConfigAxis::CL: return "CL";
  }
  return "BT";
}

const char* to_string(TauAxis axis) {
  switch (axis) {
    case TauAxis::TT: return "TT";
    case TauAxis::VT: return "VT";
    case TauAxis::OT: return "OT";
  }
  return "TT";
}

std::string ProtocolCell::column() const {
  return std::string(to_string(config_axis)) + "-" + to_string(tau_axis);
}

const std::pair<ConfigAxis, TauAxis> kProtocolColumns[kProtocolColumnCount] = {
    {ConfigAxis::BT, TauAxis::TT}, {ConfigAxis::BT, TauAxis::VT}, {ConfigAxis::BV, TauAxis::TT},
    {ConfigAxis::BV, TauAxis::VT}, {ConfigAxis::BV, TauAxis::OT}, {ConfigAxis::CL, TauAxis::TT},
    {ConfigAxis::CL, TauAxis::VT}, {ConfigAxis::CL, TauAxis::OT},
};

namespace {

void check_unit(double v, const std::string& what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(what + " must lie in [0,1]");
}

void validate_series(const RunManifest& run, const std::vector<EpochRecord>& series, Split split) {
  const std::string where = "run '" + run.run_id + "' " + to_string(split);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const EpochRecord& r = series[i];
    const std::string at = where + " epoch " + std::to_string(r.epoch);
    if (r.epoch < 0) throw ValidationError(at + ": epoch must be non-negative");
    if (i > 0 && r.epoch <= series[i - 1].epoch) {
      throw ValidationError(at + ": epochs must be strictly increasing");
    }
    check_unit(r.classification_acc, at + " classification_acc");
    for (const auto& [src, v] : r.loc_scores) check_unit(v, at + " loc score '" + src + "'");
    for (const auto& [src, v] : r.otsu_scores) check_unit(v, at + " otsu score '" + src + "'");
    for (const auto& [src, curve] : r.curves) {
      if (curve.size() != run.grid.size()) {
        throw ValidationError(at + ": curve '" + src + "' length differs from the grid");
      }
      for (double v : curve) check_unit(v, at + " curve '" + src + "'");
    }
  }
}

}  // namespace

void validate_run(const RunManifest& run) {
  if (run.run_id.empty()) throw ValidationError("run manifest has an empty run_id");
  if (!run.grid.empty()) ThresholdGrid::from_values(run.grid);
  validate_series(run, run.val, Split::Val);
  validate_series(run, run.test, Split::Test);
  if (!run.val.empty() && !run.test.empty()) {
    if (run.val.size() != run.test.size()) {
      throw ValidationError("run '" + run.run_id + "': val and test series have different lengths");
    }
    for (std::size_t i = 0; i < run.val.size(); ++i) {
      if (run.val[i].epoch != run.test[i].epoch) {
        throw ValidationError("run '" + run.run_id + "': val and test series are not aligned at epoch " +
                              std::to_string(run.val[i].epoch));
      }
    }
  }
}

std::string Criterion::label() const {
  return kind == Kind::Classification ? "classification" : "loc:" + source;
}

Criterion parse_criterion(const std::string& text) {
  if (text == "classification" || text == "cls") return Criterion::classification();
  if (text.rfind("loc:", 0) == 0 && text.size() > 4) return Criterion::localization(text.substr(4));
  throw ValidationError("unknown criterion '" + text + "' (expected classification or loc:<source>)");
}

double criterion_value(const EpochRecord& record, const Criterion& criterion) {
  if (criterion.kind == Criterion::Kind::Classification) return record.classification_acc;
  if (const auto it = record.loc_scores.find(criterion.source); it != record.loc_scores.end()) {
    return it->second;
  }
  if (const auto it = record.curves.find(criterion.source); it != record.curves.end() && !it->second.empty()) {
    return *std::max_element(it->second.begin(), it->second.end());
  }
  throw ValidationError("epoch " + std::to_string(record.epoch) + " has no score for criterion '" +
                        criterion.label() + "'");
}

StopPoint early_stop(std::span<const EpochRecord> series, const Criterion& criterion) {
  if (series.empty()) throw ValidationError("early stopping needs a non-empty epoch series");
  StopPoint best{series[0].epoch, 0, criterion_value(series[0], criterion)};
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double v = criterion_value(series[i], criterion);
    if (v > best.score) best = {series[i].epoch, i, v};
  }
  return best;
}

StopPoint early_stop(const RunManifest& run, const Criterion& criterion, Split split) {
  const auto& series = run.series(split);
  if (series.empty()) {
    throw ValidationError("run '" + run.run_id + "' has no " + to_string(split) + " series");
  }
  return early_stop(series, criterion);
}

ConfigSelection select_config(std::span<const RunManifest> runs, const Criterion& criterion, Split split) {
  if (runs.empty()) throw ValidationError("configuration selection needs at least one run");
  std::optional<ConfigSelection> best;
  for (const auto& run : runs) {
    const StopPoint stop = early_stop(run, criterion, split);
    if (!best || stop.score > best->stop.score ||
        (stop.score == best->stop.score && run.run_id < best->run_id)) {
      best = ConfigSelection{run.run_id, stop};
    }
  }
  return *best;
}

double estimate_tau(std::span<const MapSample> val, const ThresholdGrid& grid, double delta,
                    const ExtractionOptions& options) {
  return max_box_acc(box_acc_curve(val, grid, delta, options)).first;
}

EpochRecord score_epoch(int epoch, double classification_acc,
                        const std::map<std::string, std::vector<MapSample>>& samples_by_source,
                        const ThresholdGrid& grid, double delta, const ExtractionOptions& options) {
  EpochRecord record;
  record.epoch = epoch;
  record.classification_acc = classification_acc;
  for (const auto& [source, samples] : samples_by_source) {
    const BoxAccCurve curve = box_acc_curve(samples, grid, delta, options);
    record.loc_scores[source] = max_box_acc(curve).second;
    record.curves[source] = curve.acc;
    // Per-image Otsu: images with a degenerate map count as misses.
    std::size_t hits = 0;
    for (const auto& s : samples) {
      if (s.map.degenerate()) continue;
      const double tau = otsu_threshold(s.map);
      hits += image_loc_score(predicted_boxes(s.map, tau, options), s.boxes) >= delta ? 1 : 0;
    }
    record.otsu_scores[source] = static_cast<double>(hits) / static_cast<double>(samples.size());
  }
  return record;
}

namespace {

struct Selected {
  const RunManifest* run = nullptr;
  std::size_t index = 0;
  std::string note;
};

const std::vector<double>* find_curve(const EpochRecord& r, const std::string& source) {
  const auto it = r.curves.find(source);
  return it == r.curves.end() ? nullptr : &it->second;
}

// Early stop + config selection on a criterion derived from one series.
// `score` returns nullopt when the epoch lacks the data.
template <typename ScoreFn>
Selected select_on(const std::vector<const RunManifest*>& runs, Split split, ScoreFn score,
                   const std::string& what) {
  Selected best;
  double best_score = 0.0;
  for (const RunManifest* run : runs) {
    const auto& series = run->series(split);
    if (series.empty()) return {nullptr, 0, "run '" + run->run_id + "' lacks a " + to_string(split) + " series"};
    std::optional<std::size_t> stop;
    double stop_score = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
      const std::optional<double> v = score(*run, series[i]);
      if (!v) {
        return {nullptr, 0, "run '" + run->run_id + "' epoch " + std::to_string(series[i].epoch) +
                                " lacks " + what};
      }
      if (!stop || *v > stop_score) {
        stop = i;
        stop_score = *v;
      }
    }
    // Runs arrive sorted by id, so strict > keeps the smallest id on ties.
    if (!best.run || stop_score > best_score) {
      best = {run, *stop, {}};
      best_score = stop_score;
    }
  }
  return best;
}

}  // namespace

std::vector<ProtocolCell> protocol_matrix(std::span<const RunManifest> runs,
                                          const ProtocolOptions& options) {
  if (runs.empty()) throw ValidationError("protocol matrix needs at least one run");
  std::vector<const RunManifest*> sorted;
  for (const auto& r : runs) {
    validate_run(r);
    sorted.push_back(&r);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const RunManifest* l, const RunManifest* r) { return l->run_id < r->run_id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->run_id == sorted[i - 1]->run_id) {
      throw ValidationError("duplicate run id '" + sorted[i]->run_id + "'");
    }
  }

  const std::string& oracle = options.oracle_source;
  auto curve_max = [](const std::vector<double>* c) -> std::optional<double> {
    if (!c || c->empty()) return std::nullopt;
    return *std::max_element(c->begin(), c->end());
  };
  auto test_tt = [&](const RunManifest&, const EpochRecord& r) { return curve_max(find_curve(r, oracle)); };

  const Selected bt = select_on(sorted, Split::Test, test_tt, "a test '" + oracle + "' curve");
  const Selected cl = select_on(
      sorted, Split::Val,
      [](const RunManifest&, const EpochRecord& r) -> std::optional<double> { return r.classification_acc; },
      "classification accuracy");

  std::vector<ProtocolCell> cells;
  for (const std::string& source : options.sources) {
    const Selected bv = select_on(
        sorted, Split::Val,
        [&](const RunManifest&, const EpochRecord& r) { return curve_max(find_curve(r, source)); },
        "a val '" + source + "' curve");

    for (const auto& [config_axis, tau_axis] : kProtocolColumns) {
      ProtocolCell cell{config_axis, tau_axis, source, std::nullopt, {}, std::nullopt, std::nullopt, {}};
      const Selected& sel = config_axis == ConfigAxis::BT ? bt : config_axis == ConfigAxis::BV ? bv : cl;
      if (!sel.run) {
        cell.note = sel.note;
        cells.push_back(std::move(cell));
        continue;
      }
      const RunManifest& run = *sel.run;
      cell.run_id = run.run_id;
      if (sel.index >= run.test.size()) {
        cell.note = "run '" + run.run_id + "' has no test series at the selected epoch";
        cells.push_back(std::move(cell));
        continue;
      }
      const EpochRecord& test = run.test[sel.index];
      cell.epoch = test.epoch;
      const std::vector<double>* test_curve = find_curve(test, oracle);

      switch (tau_axis) {
        case TauAxis::TT: {
          if (!test_curve || test_curve->empty()) {
            cell.note = "missing test '" + oracle + "' curve";
            break;
          }
          const auto best = std::max_element(test_curve->begin(), test_curve->end());
          cell.value = *best;
          cell.tau = run.grid[static_cast<std::size_t>(best - test_curve->begin())];
          break;
        }
        case TauAxis::VT: {
          const std::vector<double>* val_curve =
              sel.index < run.val.size() ? find_curve(run.val[sel.index], source) : nullptr;
          if (!val_curve || val_curve->empty()) {
            cell.note = "missing val '" + source + "' curve";
            break;
          }
          if (!test_curve || test_curve->empty()) {
            cell.note = "missing test '" + oracle + "' curve";
            break;
          }
          const auto k = static_cast<std::size_t>(std::max_element(val_curve->begin(), val_curve->end()) -
                                                  val_curve->begin());
          cell.value = (*test_curve)[k];
          cell.tau = run.grid[k];
          break;
        }
        case TauAxis::OT: {
          const auto it = test.otsu_scores.find(oracle);
          if (it == test.otsu_scores.end()) {
            cell.note = "missing test '" + oracle + "' Otsu score";
            break;
          }
          cell.value = it->second;
          break;
        }
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

EpochDiffHistogram epoch_diff_histogram(std::span<const RunManifest> runs, const Criterion& a,
                                        const Criterion& b, Split split) {
  std::vector<const RunManifest*> sorted;
  for (const auto& r : runs) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const RunManifest* l, const RunManifest* r) { return l->run_id < r->run_id; });
  EpochDiffHistogram hist;
  long long sum = 0;
  for (const RunManifest* run : sorted) {
    const int d = early_stop(*run, a, split).epoch - early_stop(*run, b, split).epoch;
    hist.diffs.push_back(d);
    ++hist.counts[d];
    sum += d;
  }
  if (hist.diffs.empty()) return hist;
  hist.mean = static_cast<double>(sum) / static_cast<double>(hist.diffs.size());
  std::size_t best_count = 0;
  for (const auto& [d, count] : hist.counts) {
    const bool better = count > best_count ||
                        (count == best_count && (std::abs(d) < std::abs(hist.mode) ||
                                                 (std::abs(d) == std::abs(hist.mode) && d < hist.mode)));
    if (better) {
      best_count = count;
      hist.mode = d;
    }
  }
  return hist;
}

}  // namespace wsoleval
