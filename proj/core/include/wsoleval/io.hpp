#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsoleval/geometry.hpp"
#include "wsoleval/heatmap.hpp"
#include "wsoleval/metrics.hpp"
#include "wsoleval/perturb.hpp"
#include "wsoleval/proposals.hpp"
#include "wsoleval/pseudo_annotator.hpp"
#include "wsoleval/selection.hpp"

namespace wsoleval {

// ---- localization maps ----------------------------------------------------
//
// WSLM layout (little-endian):
//   "WSLM" | u8 version = 1 | u32 height | u32 width | height*width f32, row-major

LocMap read_wslm(const std::string& path);
void write_wslm(const std::string& path, const LocMap& map);

/// 8- or 16-bit grayscale PNG, values scaled to [0,1].
LocMap read_png_map(const std::string& path);
void write_png_gray(const std::string& path, std::size_t width, std::size_t height,
                    std::span<const std::uint16_t> values, int bit_depth);

/// Dispatches on content: WSLM magic or PNG signature.
LocMap read_locmap(const std::string& path);

/// Throws ValidationError/IoError if the header of a map file is unusable.
void check_locmap_header(const std::string& path);

// ---- images ---------------------------------------------------------------

/// PNG (any color type, converted to 8-bit RGB) or binary/ASCII PPM.
RgbImage read_image(const std::string& path);
void write_ppm(const std::string& path, const RgbImage& image);

// ---- box / proposal JSONL -------------------------------------------------
//
// One object per line:
//   {"image_id": str, "x_min": num, "y_min": num, "x_max": num, "y_max": num,
//    "objectness": num, "classifier_score": num|null, "source": "ss"|"rpn"|"clip"}
// Optional: "image_width", "image_height" (int), "stage_trace" (object).

enum class RowSchema {
  Proposal,  // objectness and source required
  Box,       // only image_id and coordinates required
};

struct BoxRow {
  std::size_t line = 0;
  std::string image_id;
  BBox box{0, 0, 1, 1};
  std::optional<double> objectness;
  std::optional<double> classifier_score;
  std::optional<std::string> source;
  std::optional<int> image_width;
  std::optional<int> image_height;
  nlohmann::json stage_trace;  // null when absent
};

struct BoxRowsReport {
  std::vector<BoxRow> rows;
  std::vector<IngestIssue> issues;
};

/// Parses every line; bad rows become issues carrying their line number.
/// Blank lines are ignored. Throws IoError if the file cannot be opened.
BoxRowsReport read_box_rows(const std::string& path, RowSchema schema);
BoxRowsReport parse_box_rows(const std::string& text, RowSchema schema);

nlohmann::json box_row_json(const BoxRow& row);
void write_box_rows(const std::string& path, std::span<const BoxRow> rows);

/// GT boxes with image dimensions (required by the perturbation tool).
std::vector<GtBox> gt_boxes_from_rows(std::span<const BoxRow> rows);
std::vector<BoxRow> rows_from_gt_boxes(std::span<const GtBox> boxes);

/// Pseudo-box row: proposal schema plus a stage_trace object.
BoxRow pseudo_box_row(const AnnotationOutcome& outcome);
nlohmann::json stage_trace_json(const StageTrace& trace);
nlohmann::json annotation_summary_json(const DatasetAnnotation& annotation, ProposalSource source);

// ---- evaluation ------------------------------------------------------------

nlohmann::json eval_result_json(const EvalResult& result);
/// "image_id,iou,hit" with a header line.
std::string per_image_csv(const EvalResult& result);
nlohmann::json curve_json(const BoxAccCurve& curve);

nlohmann::json perturb_summary_json(const PerturbSummary& summary);

// ---- runs and selection -----------------------------------------------------

RunManifest run_manifest_from_json(const nlohmann::json& j);
nlohmann::json run_manifest_json(const RunManifest& run);
RunManifest read_run_manifest(const std::string& path);

nlohmann::json protocol_matrix_json(std::span<const ProtocolCell> cells);
/// Rows are sources, columns the protocol cells; unavailable cells are empty.
std::string protocol_matrix_csv(std::span<const ProtocolCell> cells);
nlohmann::json histogram_json(const EpochDiffHistogram& hist);

// ---- plain files -------------------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
nlohmann::json read_json_file(const std::string& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& j);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace wsoleval
