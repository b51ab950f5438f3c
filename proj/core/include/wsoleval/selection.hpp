#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsoleval/heatmap.hpp"
#include "wsoleval/metrics.hpp"

namespace wsoleval {

enum class Split { Val, Test };
const char* to_string(Split split);

/// Scores of one training epoch on one split. `curves` hold BoxAcc over the
/// run's threshold grid per annotation source; `loc_scores` are scalar
/// localization scores (MaxBoxAcc unless the producer says otherwise);
/// `otsu_scores` are BoxAcc with per-image Otsu thresholds.
struct EpochRecord {
  int epoch = 0;
  double classification_acc = 0.0;
  std::map<std::string, double> loc_scores;
  std::map<std::string, std::vector<double>> curves;
  std::map<std::string, double> otsu_scores;
};

struct RunManifest {
  std::string run_id;
  std::map<std::string, std::string> config;
  std::vector<double> grid;  // thresholds the curves are sampled on
  std::vector<EpochRecord> val;
  std::vector<EpochRecord> test;

  const std::vector<EpochRecord>& series(Split split) const { return split == Split::Val ? val : test; }
};

/// Throws ValidationError on non-increasing epochs, misaligned val/test
/// series, scores outside [0,1] or curves whose length differs from the grid.
void validate_run(const RunManifest& run);

struct Criterion {
  enum class Kind { Classification, Localization };
  Kind kind = Kind::Classification;
  std::string source;  // annotation source for Localization

  static Criterion classification() { return {Kind::Classification, {}}; }
  static Criterion localization(std::string source) { return {Kind::Localization, std::move(source)}; }
  std::string label() const;
};

/// Parses "classification" / "cls" or "loc:<source>".
Criterion parse_criterion(const std::string& text);

/// Criterion value at one epoch: classification accuracy, or the source's
/// loc score (falling back to the curve maximum). Throws ValidationError
/// naming the epoch when the criterion is absent.
double criterion_value(const EpochRecord& record, const Criterion& criterion);

struct StopPoint {
  int epoch = 0;
  std::size_t index = 0;
  double score = 0.0;
};

/// Argmax epoch of the criterion over the series, ties to the earliest.
StopPoint early_stop(std::span<const EpochRecord> series, const Criterion& criterion);
StopPoint early_stop(const RunManifest& run, const Criterion& criterion, Split split = Split::Val);

struct ConfigSelection {
  std::string run_id;
  StopPoint stop;
};

/// Early-stops every run on `split`, then picks the best stopped score, ties
/// to the lexicographically smallest run id.
ConfigSelection select_config(std::span<const RunManifest> runs, const Criterion& criterion,
                              Split split = Split::Val);

/// Threshold maximizing BoxAcc on the validation samples (ties to the
/// lowest tau). The single value is then applied unchanged to test.
double estimate_tau(std::span<const MapSample> val, const ThresholdGrid& grid, double delta,
                    const ExtractionOptions& options = {});

/// Scores one epoch from its maps: per-source BoxAcc curve, its maximum as
/// the loc score, and the per-image Otsu BoxAcc.
EpochRecord score_epoch(int epoch, double classification_acc,
                        const std::map<std::string, std::vector<MapSample>>& samples_by_source,
                        const ThresholdGrid& grid, double delta, const ExtractionOptions& options = {});

enum class ConfigAxis { BT, BV, CL };
enum class TauAxis { TT, VT, OT };
const char* to_string(ConfigAxis axis);
const char* to_string(TauAxis axis);

struct ProtocolCell {
  ConfigAxis config_axis;
  TauAxis tau_axis;
  std::string source;             // validation annotation source of the row
  std::optional<double> value;    // test metric; unset when unavailable
  std::string run_id;             // selected configuration
  std::optional<int> epoch;       // selected epoch
  std::optional<double> tau;      // tau applied on test (unset for OT)
  std::string note;               // why a cell is unavailable

  std::string column() const;     // e.g. "BV-VT"
};

struct ProtocolOptions {
  std::vector<std::string> sources{"oracle"};
  std::string oracle_source = "oracle";  // test-set reference boxes
};

/// Table of test-set metrics for every (config axis, tau axis, source):
///   BT: select run and epoch on the test oracle MaxBoxAcc
///   BV: select on validation MaxBoxAcc against `source` boxes
///   CL: select on validation classification accuracy
///   TT: MaxBoxAcc on test; VT: test BoxAcc at the tau maximizing the
///   validation curve of `source` at the selected epoch; OT: per-image Otsu.
/// Runs are processed in run-id order, so input order does not matter.
/// Rows are sources in the given order; cells follow kProtocolColumns.
std::vector<ProtocolCell> protocol_matrix(std::span<const RunManifest> runs,
                                          const ProtocolOptions& options = {});

inline constexpr std::size_t kProtocolColumnCount = 8;
/// Column order of protocol_matrix rows.
extern const std::pair<ConfigAxis, TauAxis> kProtocolColumns[kProtocolColumnCount];

struct EpochDiffHistogram {
  std::map<int, std::size_t> counts;  // epoch difference -> number of runs
  std::vector<int> diffs;             // per run, run-id order
  int mode = 0;                       // most frequent; ties to smallest |d|, then smallest d
  double mean = 0.0;
};

/// Histogram of early_stop(a) - early_stop(b) across runs.
EpochDiffHistogram epoch_diff_histogram(std::span<const RunManifest> runs, const Criterion& a,
                                        const Criterion& b, Split split = Split::Val);

}  // namespace wsoleval
