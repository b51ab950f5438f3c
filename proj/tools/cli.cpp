#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "workspace.hpp"
#include "wsoleval/error.hpp"
#include "wsoleval/io.hpp"
#include "wsoleval/metrics.hpp"
#include "wsoleval/perturb.hpp"
#include "wsoleval/proposals.hpp"
#include "wsoleval/pseudo_annotator.hpp"
#include "wsoleval/report.hpp"
#include "wsoleval/selection.hpp"

namespace wsoleval::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- shared helpers --------------------------------------------------------

std::string issues_message(const std::string& path, const std::vector<IngestIssue>& issues) {
  std::string msg = "'" + path + "' has " + std::to_string(issues.size()) + " invalid row(s)";
  for (std::size_t i = 0; i < issues.size() && i < 5; ++i) {
    msg += "\n  line " + std::to_string(issues[i].line) + ": " + issues[i].message;
  }
  return msg;
}

json issues_json(const std::vector<IngestIssue>& issues) {
  json out = json::array();
  for (const auto& i : issues) out.push_back({{"line", i.line}, {"message", i.message}});
  return out;
}

/// Reference boxes grouped by image id (sorted), rejecting files with bad rows.
std::map<std::string, std::vector<BBox>> load_boxes(const std::string& path) {
  const auto report = read_box_rows(path, RowSchema::Box);
  if (!report.issues.empty()) throw ValidationError(issues_message(path, report.issues));
  std::map<std::string, std::vector<BBox>> out;
  for (const auto& row : report.rows) out[row.image_id].push_back(row.box);
  return out;
}

LocMap load_map(const fs::path& dir, const std::string& image_id) {
  const auto path = find_map(dir, image_id);
  if (!path) {
    throw IoError("no map for image '" + image_id + "' in '" + dir.string() + "' (expected " + image_id +
                  ".wslm or " + image_id + ".png)");
  }
  return read_locmap(path->string());
}

std::vector<MapSample> load_samples(const std::string& maps_dir, const std::string& boxes_path) {
  std::vector<MapSample> samples;
  for (auto& [id, boxes] : load_boxes(boxes_path)) {
    samples.push_back({id, normalize(load_map(maps_dir, id)), std::move(boxes)});
  }
  if (samples.empty()) throw ValidationError("'" + boxes_path + "' contains no boxes");
  return samples;
}

Connectivity parse_connectivity(int c) {
  if (c == 4) return Connectivity::Four;
  if (c == 8) return Connectivity::Eight;
  throw ValidationError("connectivity must be 4 or 8, got " + std::to_string(c));
}

std::vector<RunManifest> load_runs(const std::vector<std::string>& paths) {
  std::vector<RunManifest> runs;
  for (const auto& p : paths) {
    for (const auto& f : list_files(p, {".json"})) runs.push_back(read_run_manifest(f.string()));
  }
  if (runs.empty()) throw ValidationError("no run manifests found");
  return runs;
}

void write_output(const std::string& path, const json& j) {
  if (!path.empty()) write_json_file(path, j);
}

// Options shared by eval and tau.
struct MetricOptions {
  std::size_t grid = 1000;
  double delta = 0.5;
  std::string mode = "all";
  int connectivity = 8;

  ExtractionOptions extraction(unsigned threads) const {
    ExtractionOptions o;
    if (mode == "all") o.mode = BoxMode::AllComponents;
    else if (mode == "largest") o.mode = BoxMode::LargestComponent;
    else throw ValidationError("--mode must be 'all' or 'largest'");
    o.connectivity = parse_connectivity(connectivity);
    o.threads = threads;
    return o;
  }
};

void add_metric_options(CLI::App* cmd, MetricOptions& m) {
  cmd->add_option("--grid", m.grid, "number of uniform thresholds in [0,1)")->check(CLI::PositiveNumber);
  cmd->add_option("--delta", m.delta, "IoU threshold for a hit");
  cmd->add_option("--mode", m.mode, "box extraction: all | largest")->check(CLI::IsMember({"all", "largest"}));
  cmd->add_option("--connectivity", m.connectivity, "4 or 8");
}

/// Fills options the user did not pass from workspace defaults.
void apply_defaults(CLI::App* cmd, const std::string& workspace, MetricOptions* metric, std::uint64_t* seed) {
  if (workspace.empty()) return;
  const WorkspaceDefaults d = load_workspace(workspace).defaults;
  if (metric) {
    if (d.grid && cmd->count("--grid") == 0) metric->grid = *d.grid;
    if (d.delta && cmd->count("--delta") == 0) metric->delta = *d.delta;
    if (d.connectivity && cmd->count("--connectivity") == 0) metric->connectivity = *d.connectivity;
  }
  if (seed && d.seed && cmd->count("--seed") == 0) *seed = *d.seed;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string maps, boxes, tau = "sweep", tau_from, out, per_image, curve, workspace;
  std::optional<double> tau_value;
  bool sweep = false;
  std::size_t otsu_bins = 256;
  MetricOptions metric;
};

json otsu_summary(const std::vector<MapSample>& samples, const MetricOptions& m, const ExtractionOptions& ext,
                  std::size_t bins, EvalResult& as_result) {
  json per_image = json::array();
  std::size_t hits = 0, degenerate = 0;
  double iou_sum = 0.0;
  as_result = EvalResult{};
  as_result.delta = m.delta;
  as_result.mode = ext.mode;
  for (const auto& s : samples) {
    double score = 0.0;
    std::optional<double> tau;
    if (s.map.degenerate()) {
      ++degenerate;
    } else {
      tau = otsu_threshold(s.map, bins);
      score = image_loc_score(predicted_boxes(s.map, *tau, ext), s.boxes);
    }
    const bool hit = score >= m.delta;
    hits += hit ? 1 : 0;
    iou_sum += score;
    as_result.per_image.push_back({s.image_id, score, hit});
    per_image.push_back({{"image_id", s.image_id}, {"tau", tau ? json(*tau) : json(nullptr)}, {"iou", score}, {"hit", hit}});
  }
  const double n = static_cast<double>(samples.size());
  return json{{"box_acc", static_cast<double>(hits) / n},
              {"mean_iou", iou_sum / n},
              {"delta", m.delta},
              {"mode", to_string(ext.mode)},
              {"images", samples.size()},
              {"degenerate_maps", degenerate},
              {"per_image", per_image}};
}

json run_eval(CLI::App* cmd, EvalArgs& a, unsigned threads) {
  apply_defaults(cmd, a.workspace, &a.metric, nullptr);
  std::string policy = a.tau;
  if (a.sweep) policy = "sweep";
  if (!a.tau_from.empty()) policy = "from-file";
  if (cmd->count("--tau-value") && cmd->count("--tau") == 0) policy = "fixed";

  const ExtractionOptions ext = a.metric.extraction(threads);
  const auto samples = load_samples(a.maps, a.boxes);
  json summary;
  EvalResult result;
  if (policy == "otsu") {
    summary = otsu_summary(samples, a.metric, ext, a.otsu_bins, result);
  } else {
    if (policy == "sweep") {
      const auto grid = ThresholdGrid::uniform(a.metric.grid);
      result = evaluate(samples, grid, a.metric.delta, ext);
      if (!a.curve.empty()) write_json_file(a.curve, curve_json(box_acc_curve(samples, grid, a.metric.delta, ext)));
    } else {
      double tau = 0.0;
      if (policy == "fixed") {
        if (!a.tau_value) throw ValidationError("--tau fixed needs --tau-value");
        tau = *a.tau_value;
      } else if (policy == "from-file") {
        if (a.tau_from.empty()) throw ValidationError("--tau from-file needs --tau-from <file>");
        const json t = read_json_file(a.tau_from);
        if (!t.contains("tau") || !t["tau"].is_number()) {
          throw ValidationError("'" + a.tau_from + "' has no numeric 'tau'");
        }
        tau = t["tau"].get<double>();
      } else {
        throw ValidationError("unknown --tau policy '" + policy + "'");
      }
      if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in [0,1]");
      result = evaluate_at(samples, tau, a.metric.delta, ext);
    }
    summary = eval_result_json(result);
    summary["box_acc"] = result.max_box_acc;
    summary["mean_iou"] = result.mean_iou_at_tau;
  }
  summary["tau_policy"] = policy;
  summary["pointing_accuracy"] = pointing_accuracy(samples).accuracy;
  if (!a.per_image.empty()) write_text_file(a.per_image, per_image_csv(result));
  write_output(a.out, summary);
  return summary;
}

// ---- tau -------------------------------------------------------------------

struct TauArgs {
  std::string maps, boxes, out, workspace;
  MetricOptions metric;
};

json run_tau(CLI::App* cmd, TauArgs& a, unsigned threads) {
  apply_defaults(cmd, a.workspace, &a.metric, nullptr);
  const auto samples = load_samples(a.maps, a.boxes);
  const auto grid = ThresholdGrid::uniform(a.metric.grid);
  const auto curve = box_acc_curve(samples, grid, a.metric.delta, a.metric.extraction(threads));
  const auto [tau, acc] = max_box_acc(curve);
  json j{{"tau", tau},      {"max_box_acc", acc},           {"delta", a.metric.delta},
         {"grid", a.metric.grid}, {"mode", a.metric.mode}, {"images", samples.size()}};
  write_output(a.out, j);
  return j;
}

// ---- perturb ---------------------------------------------------------------

struct PerturbArgs {
  int level = 1;
  std::uint64_t seed = 0;
  std::string in, out, summary, workspace;
};

json run_perturb(CLI::App* cmd, PerturbArgs& a, unsigned threads) {
  apply_defaults(cmd, a.workspace, nullptr, &a.seed);
  if (a.level < 1 || a.level > 10) throw ValidationError("--level must lie in 1..10");
  const auto rows = read_box_rows(a.in, RowSchema::Box);
  if (!rows.issues.empty()) throw ValidationError(issues_message(a.in, rows.issues));
  const auto gt = gt_boxes_from_rows(rows.rows);
  const auto noisy = perturb_dataset(gt, NoiseSpec(a.level, a.seed), threads);
  write_box_rows(a.out, rows_from_gt_boxes(noisy.boxes));
  json j = perturb_summary_json(noisy.summary);
  j["seed"] = a.seed;
  j["out"] = a.out;
  write_output(a.summary, j);
  return j;
}

// ---- propose ---------------------------------------------------------------

struct ProposeArgs {
  std::vector<std::string> images;
  std::string out;
  double k = 300.0;
  std::size_t min_size = 100;
  std::uint64_t seed = 0;
  std::size_t max_per_image = 0;
};

json run_propose(ProposeArgs& a, unsigned threads) {
  std::vector<fs::path> files;
  for (const auto& p : a.images) {
    for (auto& f : list_files(p, {".png", ".ppm"})) files.push_back(std::move(f));
  }
  if (files.empty()) throw ValidationError("no .png or .ppm images found");
  std::vector<RgbImage> images;
  for (const auto& f : files) images.push_back(read_image(f.string()));
  SelectiveSearchParams params;
  params.k = a.k;
  params.min_size = a.min_size;
  params.seed = a.seed;
  const auto proposals = selective_search_all(images, params, threads);

  std::vector<BoxRow> rows;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& props = proposals[i];
    const std::size_t keep = a.max_per_image ? std::min(a.max_per_image, props.size()) : props.size();
    for (std::size_t k = 0; k < keep; ++k) {
      BoxRow row;
      row.image_id = files[i].stem().string();
      row.box = props[k].box;
      row.objectness = props[k].objectness;
      row.source = "ss";
      row.image_width = static_cast<int>(images[i].width());
      row.image_height = static_cast<int>(images[i].height());
      rows.push_back(std::move(row));
    }
  }
  write_box_rows(a.out, rows);
  return json{{"images", files.size()}, {"proposals", rows.size()}, {"out", a.out}};
}

// ---- annotate --------------------------------------------------------------

struct AnnotateArgs {
  std::string source, proposals, cams, clip_maps, out, summary, rank_key, largest_by = "area";
  double fraction = 0.2;
  int connectivity = 8;
};

json run_annotate(AnnotateArgs& a, unsigned threads, int& exit_code) {
  const ProposalSource source = parse_proposal_source(a.source);
  AnnotatorOptions opt;
  opt.fraction = a.fraction;
  opt.connectivity = parse_connectivity(a.connectivity);
  opt.largest_by = a.largest_by == "pixels" ? LargestBy::ComponentPixels : LargestBy::BoxArea;
  if (a.rank_key == "objectness") opt.rank_key = RankKey::Objectness;
  if (a.rank_key == "classifier") opt.rank_key = RankKey::ClassifierScore;

  std::vector<ImageRecord> records;
  std::map<std::string, std::pair<int, int>> dims;
  std::vector<IngestIssue> issues;
  std::vector<AnnotationError> source_errors;
  if (source == ProposalSource::CLIP) {
    if (a.clip_maps.empty()) throw ValidationError("--source clip needs --clip-maps <dir>");
    for (const auto& f : list_files(a.clip_maps, {".wslm", ".png"})) {
      const LocMap map = read_locmap(f.string());
      const std::string id = f.stem().string();
      dims[id] = {static_cast<int>(map.width()), static_cast<int>(map.height())};
      records.push_back({id, -1, {}, std::nullopt, normalize(map)});
    }
  } else {
    if (a.proposals.empty() || a.cams.empty()) {
      throw ValidationError("--source " + a.source + " needs --proposals <file> and --cams <dir>");
    }
    std::map<std::string, LocMap> cams;
    for (const auto& f : list_files(a.cams, {".wslm", ".png"})) {
      const std::string id = f.stem().string();
      if (cams.count(id)) continue;
      cams.emplace(id, read_locmap(f.string()));
      dims[id] = {static_cast<int>(cams.at(id).width()), static_cast<int>(cams.at(id).height())};
    }
    const auto ingest = ingest_proposals(a.proposals, [&](const std::string& id) -> std::optional<std::pair<int, int>> {
      const auto it = dims.find(id);
      if (it == dims.end()) return std::nullopt;
      return it->second;
    });
    issues = ingest.issues;
    std::set<std::string> seen;
    for (const auto& set : ingest.images) {
      seen.insert(set.image_id);
      if (set.source != source) {
        source_errors.push_back({set.image_id, std::string("proposals are '") + to_string(set.source) +
                                                   "' but --source is '" + a.source + "'"});
        continue;
      }
      std::optional<NormalizedLocMap> cam;
      if (const auto it = cams.find(set.image_id); it != cams.end()) cam = normalize(it->second);
      records.push_back({set.image_id, -1, set.proposals, cam, std::nullopt});
    }
    // Images with a CAM but no proposals are reported, not dropped.
    for (const auto& [id, map] : cams) {
      if (!seen.count(id)) records.push_back({id, -1, {}, normalize(map), std::nullopt});
    }
  }

  DatasetAnnotation result = annotate_dataset(records, source, opt, threads);
  for (auto& e : source_errors) result.errors.push_back(std::move(e));
  std::sort(result.errors.begin(), result.errors.end(),
            [](const AnnotationError& l, const AnnotationError& r) { return l.image_id < r.image_id; });

  std::vector<BoxRow> rows;
  for (const auto& o : result.outcomes) {
    BoxRow row = pseudo_box_row(o);
    if (const auto it = dims.find(o.image_id); it != dims.end()) {
      row.image_width = it->second.first;
      row.image_height = it->second.second;
    }
    rows.push_back(std::move(row));
  }
  write_box_rows(a.out, rows);
  json j = annotation_summary_json(result, source);
  j["out"] = a.out;
  j["ingest_issues"] = issues_json(issues);
  write_output(a.summary, j);
  if (!result.errors.empty() || !issues.empty()) exit_code = kValidationError;
  return j;
}

// ---- select / report ---------------------------------------------------------

struct SelectArgs {
  std::vector<std::string> runs, sources{"oracle"};
  std::string criterion = "loc:oracle", split = "val", oracle_source = "oracle", out, csv, epoch_diff, against;
  bool matrix = false;
};

Split parse_split(const std::string& s) {
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw ValidationError("--split must be 'val' or 'test'");
}

json run_select(SelectArgs& a) {
  const auto runs = load_runs(a.runs);
  for (const auto& r : runs) validate_run(r);
  const Criterion crit = parse_criterion(a.criterion);
  const Split split = parse_split(a.split);
  json per_run = json::array();
  for (const auto& r : runs) {
    const StopPoint s = early_stop(r, crit, split);
    per_run.push_back({{"run_id", r.run_id}, {"epoch", s.epoch}, {"score", s.score}});
  }
  const ConfigSelection sel = select_config(runs, crit, split);
  json j{{"criterion", crit.label()},
         {"split", to_string(split)},
         {"runs", per_run},
         {"selected", {{"run_id", sel.run_id}, {"epoch", sel.stop.epoch}, {"score", sel.stop.score}}}};
  if (a.matrix || !a.csv.empty()) {
    const auto cells = protocol_matrix(runs, {a.sources, a.oracle_source});
    j["matrix"] = protocol_matrix_json(cells);
    if (!a.csv.empty()) write_text_file(a.csv, protocol_matrix_csv(cells));
  }
  if (!a.epoch_diff.empty()) {
    if (a.against.empty()) throw ValidationError("--epoch-diff needs --against <criterion>");
    j["epoch_diff"] = histogram_json(
        epoch_diff_histogram(runs, parse_criterion(a.epoch_diff), parse_criterion(a.against), split));
  }
  write_output(a.out, j);
  return j;
}

struct ReportArgs {
  std::vector<std::string> runs, sources{"oracle"}, criteria{"classification", "loc:oracle"};
  std::string out_dir, split = "val", oracle_source = "oracle", epoch_diff, against;
};

json run_report(ReportArgs& a) {
  const auto runs = load_runs(a.runs);
  const Split split = parse_split(a.split);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  json written = json::array();
  auto emit = [&](const std::string& name, const std::string& content) {
    write_text_file((dir / name).string(), content);
    written.push_back((dir / name).string());
  };
  const auto cells = protocol_matrix(runs, {a.sources, a.oracle_source});
  emit("matrix.csv", protocol_matrix_csv(cells));
  emit("matrix.json", protocol_matrix_json(cells).dump(2) + "\n");
  std::vector<Criterion> criteria;
  for (const auto& c : a.criteria) criteria.push_back(parse_criterion(c));
  emit("curves.svg", svg_epoch_curves(runs, criteria, split));
  if (!a.epoch_diff.empty()) {
    if (a.against.empty()) throw ValidationError("--epoch-diff needs --against <criterion>");
    const auto hist = epoch_diff_histogram(runs, parse_criterion(a.epoch_diff), parse_criterion(a.against), split);
    emit("histogram.json", histogram_json(hist).dump(2) + "\n");
    emit("histogram.svg", svg_histogram(hist, a.epoch_diff + " minus " + a.against));
  }
  return json{{"runs", runs.size()}, {"written", written}};
}

// ---- dispatch ----------------------------------------------------------------

json error_json(const std::string& kind, const std::string& message) {
  return json{{"ok", false}, {"error", kind}, {"message", message}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"wsoleval: weakly supervised localization evaluation toolkit", "wsoleval"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 1;
  app.add_option("--threads", threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);

  ProposeArgs propose;
  auto* c_propose = app.add_subcommand("propose", "Selective Search proposals for RGB images");
  c_propose->add_option("--images", propose.images, "image files or directories (.png/.ppm)")->required();
  c_propose->add_option("--out", propose.out, "proposals JSONL")->required();
  c_propose->add_option("--k", propose.k, "segmentation scale");
  c_propose->add_option("--min-size", propose.min_size, "minimum segment size in pixels");
  c_propose->add_option("--seed", propose.seed, "objectness shuffle seed");
  c_propose->add_option("--max-per-image", propose.max_per_image, "keep the N highest-objectness proposals (0: all)");

  AnnotateArgs annotate_args;
  auto* c_annotate = app.add_subcommand("annotate", "pseudo boxes from proposals and CAMs, or from CLIP maps");
  c_annotate->add_option("--source", annotate_args.source, "ss | rpn | clip")
      ->required()
      ->check(CLI::IsMember({"ss", "rpn", "clip"}));
  c_annotate->add_option("--proposals", annotate_args.proposals, "proposals JSONL (ss, rpn)");
  c_annotate->add_option("--cams", annotate_args.cams, "directory of <image_id>.wslm|png CAMs (ss, rpn)");
  c_annotate->add_option("--clip-maps", annotate_args.clip_maps, "directory of CLIP maps (clip)");
  c_annotate->add_option("--out", annotate_args.out, "pseudo-box JSONL")->required();
  c_annotate->add_option("--summary", annotate_args.summary, "also write the summary JSON here");
  c_annotate->add_option("--fraction", annotate_args.fraction, "top fraction kept before the pointing game");
  c_annotate->add_option("--rank-key", annotate_args.rank_key, "objectness | classifier")
      ->check(CLI::IsMember({"objectness", "classifier"}));
  c_annotate->add_option("--largest-by", annotate_args.largest_by, "area | pixels (clip)")
      ->check(CLI::IsMember({"area", "pixels"}));
  c_annotate->add_option("--connectivity", annotate_args.connectivity, "4 or 8");

  PerturbArgs perturb;
  auto* c_perturb = app.add_subcommand("perturb", "noisy copies of ground-truth boxes");
  c_perturb->add_option("--level", perturb.level, "noise level 1..10")->required();
  c_perturb->add_option("--seed", perturb.seed, "random seed");
  c_perturb->add_option("--in", perturb.in, "boxes JSONL with image_width/image_height")->required();
  c_perturb->add_option("--out", perturb.out, "noisy boxes JSONL")->required();
  c_perturb->add_option("--summary", perturb.summary, "also write the summary JSON here");
  c_perturb->add_option("--workspace", perturb.workspace, "workspace manifest supplying defaults");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "localization metrics of maps against boxes");
  c_eval->add_option("--maps", eval.maps, "directory of <image_id>.wslm|png maps")->required();
  c_eval->add_option("--boxes", eval.boxes, "reference boxes JSONL")->required();
  c_eval->add_option("--tau", eval.tau, "fixed | sweep | otsu | from-file")
      ->check(CLI::IsMember({"fixed", "sweep", "otsu", "from-file"}));
  c_eval->add_option("--tau-value", eval.tau_value, "threshold for --tau fixed");
  c_eval->add_option("--tau-from", eval.tau_from, "JSON file with a 'tau' entry (output of `tau`)");
  c_eval->add_flag("--sweep", eval.sweep, "same as --tau sweep");
  c_eval->add_option("--otsu-bins", eval.otsu_bins, "histogram bins for --tau otsu");
  c_eval->add_option("--out", eval.out, "also write the summary JSON here");
  c_eval->add_option("--per-image", eval.per_image, "per-image CSV (image_id,iou,hit)");
  c_eval->add_option("--curve", eval.curve, "BoxAcc curve JSON (sweep only)");
  c_eval->add_option("--workspace", eval.workspace, "workspace manifest supplying defaults");
  add_metric_options(c_eval, eval.metric);

  TauArgs tau;
  auto* c_tau = app.add_subcommand("tau", "estimate the threshold on validation maps");
  c_tau->add_option("--maps", tau.maps, "directory of validation maps")->required();
  c_tau->add_option("--boxes", tau.boxes, "validation boxes JSONL (oracle or pseudo)")->required();
  c_tau->add_option("--out", tau.out, "threshold JSON")->required();
  c_tau->add_option("--workspace", tau.workspace, "workspace manifest supplying defaults");
  add_metric_options(c_tau, tau.metric);

  SelectArgs select;
  auto* c_select = app.add_subcommand("select", "early stopping, configuration selection, protocol matrix");
  c_select->add_option("--runs", select.runs, "run manifest files or directories")->required();
  c_select->add_option("--criterion", select.criterion, "classification | loc:<source>");
  c_select->add_option("--split", select.split, "val | test")->check(CLI::IsMember({"val", "test"}));
  c_select->add_flag("--matrix", select.matrix, "include the protocol matrix");
  c_select->add_option("--sources", select.sources, "validation sources for matrix rows")->delimiter(',');
  c_select->add_option("--oracle-source", select.oracle_source, "test reference source");
  c_select->add_option("--csv", select.csv, "write the protocol matrix as CSV");
  c_select->add_option("--epoch-diff", select.epoch_diff, "criterion A of an epoch-difference histogram");
  c_select->add_option("--against", select.against, "criterion B of the histogram");
  c_select->add_option("--out", select.out, "also write the summary JSON here");

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "CSV/JSON/SVG reports from run manifests");
  c_report->add_option("--runs", report.runs, "run manifest files or directories")->required();
  c_report->add_option("--out-dir", report.out_dir, "output directory")->required();
  c_report->add_option("--sources", report.sources, "validation sources for matrix rows")->delimiter(',');
  c_report->add_option("--oracle-source", report.oracle_source, "test reference source");
  c_report->add_option("--criteria", report.criteria, "criteria plotted in curves.svg")->delimiter(',');
  c_report->add_option("--split", report.split, "val | test")->check(CLI::IsMember({"val", "test"}));
  c_report->add_option("--epoch-diff", report.epoch_diff, "criterion A of an epoch-difference histogram");
  c_report->add_option("--against", report.against, "criterion B of the histogram");

  std::string workspace_path;
  auto* c_validate = app.add_subcommand("validate", "check every file referenced by a workspace manifest");
  c_validate->add_option("--workspace", workspace_path, "workspace manifest JSON")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto parsed = app.get_subcommands();
    out << (parsed.empty() ? app.help() : parsed.front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "wsoleval: " << e.what() << "\n";
    out << error_json("usage", e.what()).dump(2) << "\n";
    return kValidationError;
  }

  CLI::App* cmd = app.get_subcommands().front();
  int code = kOk;
  try {
    json summary;
    if (cmd == c_propose) summary = run_propose(propose, threads);
    else if (cmd == c_annotate) summary = run_annotate(annotate_args, threads, code);
    else if (cmd == c_perturb) summary = run_perturb(cmd, perturb, threads);
    else if (cmd == c_eval) summary = run_eval(cmd, eval, threads);
    else if (cmd == c_tau) summary = run_tau(cmd, tau, threads);
    else if (cmd == c_select) summary = run_select(select);
    else if (cmd == c_report) summary = run_report(report);
    else {
      const WorkspaceReport r = validate_workspace(load_workspace(workspace_path));
      summary = report_json(r);
      if (!r.valid()) code = kValidationError;
    }
    summary["ok"] = code == kOk;
    summary["command"] = cmd->get_name();
    out << summary.dump(2) << "\n";
    return code;
  } catch (const IoError& e) {
    err << "wsoleval " << cmd->get_name() << ": " << e.what() << "\n";
    out << error_json("io", e.what()).dump(2) << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "wsoleval " << cmd->get_name() << ": " << e.what() << "\n";
    out << error_json("io", e.what()).dump(2) << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << "wsoleval " << cmd->get_name() << ": " << e.what() << "\n";
    out << error_json("validation", e.what()).dump(2) << "\n";
    return kValidationError;
  } catch (const nlohmann::json::exception& e) {
    err << "wsoleval " << cmd->get_name() << ": " << e.what() << "\n";
    out << error_json("validation", e.what()).dump(2) << "\n";
    return kValidationError;
  }
}

}  // namespace wsoleval::cli
