#include "wsoleval/io.hpp"

#include <png.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "wsoleval/error.hpp"

namespace wsoleval {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

// ---- WSLM -------------------------------------------------------------------

namespace {

constexpr std::array<char, 4> kWslmMagic = {'W', 'S', 'L', 'M'};
constexpr std::uint8_t kWslmVersion = 1;
constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::uint32_t load_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct WslmHeader {
  std::uint32_t height;
  std::uint32_t width;
};

WslmHeader parse_wslm_header(const std::string& bytes, const std::string& path) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kWslmMagic.data(), 4) != 0) {
    throw ValidationError("'" + path + "': bad magic, expected WSLM");
  }
  if (bytes.size() < 13) throw ValidationError("'" + path + "': truncated WSLM header");
  if (static_cast<std::uint8_t>(bytes[4]) != kWslmVersion) {
    throw ValidationError("'" + path + "': unsupported WSLM version " +
                          std::to_string(static_cast<unsigned>(static_cast<std::uint8_t>(bytes[4]))));
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const WslmHeader h{load_u32le(p + 5), load_u32le(p + 9)};
  if (h.height == 0 || h.width == 0) throw ValidationError("'" + path + "': WSLM map has zero size");
  const std::uint64_t expected = 13 + 4ull * h.height * h.width;
  if (bytes.size() != expected) {
    throw ValidationError("'" + path + "': WSLM payload size " + std::to_string(bytes.size()) +
                          " does not match " + std::to_string(h.height) + "x" + std::to_string(h.width));
  }
  return h;
}

bool has_prefix(const std::string& bytes, const unsigned char* prefix, std::size_t n) {
  return bytes.size() >= n && std::memcmp(bytes.data(), prefix, n) == 0;
}

}  // namespace

LocMap read_wslm(const std::string& path) {
  const std::string bytes = read_text_file(path);
  const WslmHeader h = parse_wslm_header(bytes, path);
  const std::size_t n = static_cast<std::size_t>(h.height) * h.width;
  std::vector<double> values(n);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + 13;
  for (std::size_t i = 0; i < n; ++i) {
    const float f = std::bit_cast<float>(load_u32le(p + 4 * i));
    if (!std::isfinite(f)) {
      throw ValidationError("'" + path + "': non-finite value at index " + std::to_string(i));
    }
    values[i] = f;
  }
  return LocMap(h.width, h.height, std::move(values));
}

void write_wslm(const std::string& path, const LocMap& map) {
  std::string out(kWslmMagic.begin(), kWslmMagic.end());
  out.push_back(static_cast<char>(kWslmVersion));
  store_u32le(out, static_cast<std::uint32_t>(map.height()));
  store_u32le(out, static_cast<std::uint32_t>(map.width()));
  for (double v : map.values()) store_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  write_text_file(path, out);
}

// ---- PNG --------------------------------------------------------------------

namespace {

class PngReader {
 public:
  explicit PngReader(const std::string& path) : path_(path) {
    std::memset(&image_, 0, sizeof(image_));
    image_.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image_, path.c_str())) {
      const std::string msg = image_.message;
      png_image_free(&image_);
      // A missing file is an I/O problem; anything else is a format problem.
      if (!std::ifstream(path)) throw IoError("cannot open '" + path + "' for reading");
      throw ValidationError("'" + path + "': unreadable PNG: " + msg);
    }
  }
  ~PngReader() { png_image_free(&image_); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  png_image& image() { return image_; }

  template <typename T>
  std::vector<T> finish(png_uint_32 format, std::size_t channels) {
    image_.format = format;
    std::vector<T> buffer(static_cast<std::size_t>(image_.width) * image_.height * channels);
    if (!png_image_finish_read(&image_, nullptr, buffer.data(), 0, nullptr)) {
      throw ValidationError("'" + path_ + "': PNG decode failed: " + image_.message);
    }
    return buffer;
  }

 private:
  std::string path_;
  png_image image_;
};

}  // namespace

LocMap read_png_map(const std::string& path) {
  PngReader reader(path);
  png_image& img = reader.image();
  if (img.format & PNG_FORMAT_FLAG_COLOR) {
    throw ValidationError("'" + path + "': map PNG must be grayscale");
  }
  const std::size_t w = img.width;
  const std::size_t h = img.height;
  std::vector<double> values(w * h);
  if (img.format & PNG_FORMAT_FLAG_LINEAR) {
    const auto buf = reader.finish<std::uint16_t>(PNG_FORMAT_LINEAR_Y, 1);
    for (std::size_t i = 0; i < buf.size(); ++i) values[i] = buf[i] / 65535.0;
  } else {
    const auto buf = reader.finish<std::uint8_t>(PNG_FORMAT_GRAY, 1);
    for (std::size_t i = 0; i < buf.size(); ++i) values[i] = buf[i] / 255.0;
  }
  return LocMap(w, h, std::move(values));
}

void write_png_gray(const std::string& path, std::size_t width, std::size_t height,
                    std::span<const std::uint16_t> values, int bit_depth) {
  if (values.size() != width * height) throw InvalidArgument("PNG buffer size mismatch");
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  int ok = 0;
  if (bit_depth == 16) {
    img.format = PNG_FORMAT_LINEAR_Y;
    ok = png_image_write_to_file(&img, path.c_str(), 0, values.data(), 0, nullptr);
  } else if (bit_depth == 8) {
    img.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> bytes(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      bytes[i] = static_cast<std::uint8_t>(std::min<std::uint16_t>(values[i], 255));
    }
    ok = png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr);
  } else {
    throw InvalidArgument("PNG bit depth must be 8 or 16");
  }
  if (!ok) throw IoError("cannot write PNG '" + path + "': " + img.message);
}

LocMap read_locmap(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string head(8, '\0');
  in.read(head.data(), 8);
  head.resize(static_cast<std::size_t>(in.gcount()));
  if (head.size() >= 4 && std::memcmp(head.data(), kWslmMagic.data(), 4) == 0) return read_wslm(path);
  if (has_prefix(head, kPngSignature.data(), kPngSignature.size())) return read_png_map(path);
  throw ValidationError("'" + path + "': bad magic, expected WSLM or PNG");
}

void check_locmap_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string head(8, '\0');
  in.read(head.data(), 8);
  head.resize(static_cast<std::size_t>(in.gcount()));
  if (head.size() >= 4 && std::memcmp(head.data(), kWslmMagic.data(), 4) == 0) {
    parse_wslm_header(read_text_file(path), path);
    return;
  }
  if (has_prefix(head, kPngSignature.data(), kPngSignature.size())) {
    PngReader reader(path);
    if (reader.image().format & PNG_FORMAT_FLAG_COLOR) {
      throw ValidationError("'" + path + "': map PNG must be grayscale");
    }
    return;
  }
  throw ValidationError("'" + path + "': bad magic, expected WSLM or PNG");
}

// ---- RGB images -------------------------------------------------------------

namespace {

RgbImage read_ppm(const std::string& path, const std::string& bytes) {
  std::size_t pos = 2;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  auto next_int = [&](const char* what) {
    const std::string tok = next_token();
    int v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v <= 0) {
      throw ValidationError("'" + path + "': bad PPM " + what);
    }
    return v;
  };
  const bool binary = bytes[1] == '6';
  const auto w = static_cast<std::size_t>(next_int("width"));
  const auto h = static_cast<std::size_t>(next_int("height"));
  const int maxval = next_int("maxval");
  if (maxval > 255) throw ValidationError("'" + path + "': 16-bit PPM is not supported");
  std::vector<std::uint8_t> rgb(w * h * 3);
  auto scale = [&](int v) { return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval); };
  if (binary) {
    ++pos;  // single whitespace after maxval
    if (bytes.size() < pos + rgb.size()) throw ValidationError("'" + path + "': truncated PPM data");
    for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = scale(static_cast<unsigned char>(bytes[pos + i]));
  } else {
    for (std::size_t i = 0; i < rgb.size(); ++i) {
      const std::string tok = next_token();
      int v = -1;
      std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (v < 0 || v > maxval) throw ValidationError("'" + path + "': bad PPM sample");
      rgb[i] = scale(v);
    }
  }
  return RgbImage(w, h, std::move(rgb));
}

}  // namespace

RgbImage read_image(const std::string& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '3')) {
    return read_ppm(path, bytes);
  }
  if (has_prefix(bytes, kPngSignature.data(), kPngSignature.size())) {
    PngReader reader(path);
    const std::size_t w = reader.image().width;
    const std::size_t h = reader.image().height;
    return RgbImage(w, h, reader.finish<std::uint8_t>(PNG_FORMAT_RGB, 3));
  }
  throw ValidationError("'" + path + "': unsupported image format (expected PNG or PPM)");
}

void write_ppm(const std::string& path, const RgbImage& image) {
  std::string out = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.data().data()), image.data().size());
  write_text_file(path, out);
}

// ---- box rows ---------------------------------------------------------------

namespace {

double require_number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw ValidationError(std::string("field '") + key + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ValidationError(std::string("field '") + key + "' must be finite");
  return v;
}

std::optional<int> optional_dim(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() || it->get<long long>() <= 0) {
    throw ValidationError(std::string("field '") + key + "' must be a positive integer");
  }
  return it->get<int>();
}

BoxRow parse_row(const json& obj, RowSchema schema) {
  if (!obj.is_object()) throw ValidationError("row is not a JSON object");
  BoxRow row;
  const auto id = obj.find("image_id");
  if (id == obj.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw ValidationError("missing or empty string field 'image_id'");
  }
  row.image_id = id->get<std::string>();
  const double x0 = require_number(obj, "x_min");
  const double y0 = require_number(obj, "y_min");
  const double x1 = require_number(obj, "x_max");
  const double y1 = require_number(obj, "y_max");
  if (!(x1 > x0) || !(y1 > y0)) {
    throw ValidationError("degenerate box: x_max must exceed x_min and y_max must exceed y_min");
  }
  row.image_width = optional_dim(obj, "image_width");
  row.image_height = optional_dim(obj, "image_height");
  // Coordinates outside the image are legal input and get clamped here.
  constexpr double unbounded = std::numeric_limits<double>::infinity();
  row.box = clamp_box(x0, y0, x1, y1, row.image_width ? *row.image_width : unbounded,
                      row.image_height ? *row.image_height : unbounded);
  if (const auto it = obj.find("objectness"); it != obj.end() && !it->is_null()) {
    const double v = require_number(obj, "objectness");
    if (v < 0.0 || v > 1.0) throw ValidationError("objectness " + format_double(v) + " outside [0,1]");
    row.objectness = v;
  } else if (schema == RowSchema::Proposal) {
    throw ValidationError("missing field 'objectness'");
  }
  if (const auto it = obj.find("classifier_score"); it != obj.end() && !it->is_null()) {
    row.classifier_score = require_number(obj, "classifier_score");
  }
  if (const auto it = obj.find("source"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("field 'source' must be a string");
    row.source = it->get<std::string>();
    parse_proposal_source(*row.source);
  } else if (schema == RowSchema::Proposal) {
    throw ValidationError("missing field 'source'");
  }
  if (const auto it = obj.find("stage_trace"); it != obj.end()) row.stage_trace = *it;
  return row;
}

}  // namespace

BoxRowsReport parse_box_rows(const std::string& text, RowSchema schema) {
  BoxRowsReport report;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      BoxRow row = parse_row(json::parse(line), schema);
      row.line = number;
      report.rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      report.issues.push_back({number, std::string("malformed JSON: ") + e.what()});
    } catch (const Error& e) {
      report.issues.push_back({number, e.what()});
    }
  }
  return report;
}

BoxRowsReport read_box_rows(const std::string& path, RowSchema schema) {
  return parse_box_rows(read_text_file(path), schema);
}

json box_row_json(const BoxRow& row) {
  json j;
  j["image_id"] = row.image_id;
  j["x_min"] = row.box.x_min();
  j["y_min"] = row.box.y_min();
  j["x_max"] = row.box.x_max();
  j["y_max"] = row.box.y_max();
  if (row.objectness) j["objectness"] = *row.objectness;
  // Proposal rows always carry the key, null when there is no score.
  if (row.classifier_score) {
    j["classifier_score"] = *row.classifier_score;
  } else if (row.source) {
    j["classifier_score"] = nullptr;
  }
  if (row.source) j["source"] = *row.source;
  if (row.image_width) j["image_width"] = *row.image_width;
  if (row.image_height) j["image_height"] = *row.image_height;
  if (!row.stage_trace.is_null()) j["stage_trace"] = row.stage_trace;
  return j;
}

void write_box_rows(const std::string& path, std::span<const BoxRow> rows) {
  std::string out;
  for (const auto& row : rows) out += box_row_json(row).dump() + "\n";
  write_text_file(path, out);
}

std::vector<GtBox> gt_boxes_from_rows(std::span<const BoxRow> rows) {
  std::vector<GtBox> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.image_width || !row.image_height) {
      throw ValidationError("line " + std::to_string(row.line) + ": box of image '" + row.image_id +
                            "' lacks image_width/image_height");
    }
    out.push_back({row.image_id, row.box, *row.image_width, *row.image_height});
  }
  return out;
}

std::vector<BoxRow> rows_from_gt_boxes(std::span<const GtBox> boxes) {
  std::vector<BoxRow> rows;
  rows.reserve(boxes.size());
  for (const auto& b : boxes) {
    BoxRow row;
    row.image_id = b.image_id;
    row.box = b.box;
    row.image_width = b.image_width;
    row.image_height = b.image_height;
    rows.push_back(std::move(row));
  }
  return rows;
}

json stage_trace_json(const StageTrace& t) {
  return json{{"ingested", t.ingested},         {"top_fraction", t.top_fraction},
              {"pointing", t.pointing},         {"pointing_hits", t.pointing_hits},
              {"final", t.final_count},         {"fallback", t.fallback},
              {"degenerate_cam", t.degenerate_cam}};
}

BoxRow pseudo_box_row(const AnnotationOutcome& outcome) {
  BoxRow row;
  row.image_id = outcome.image_id;
  row.box = outcome.box;
  row.objectness = outcome.objectness;
  row.classifier_score = outcome.classifier_score;
  row.source = to_string(outcome.source);
  row.stage_trace = stage_trace_json(outcome.trace);
  return row;
}

json annotation_summary_json(const DatasetAnnotation& annotation, ProposalSource source) {
  json errors = json::array();
  for (const auto& e : annotation.errors) errors.push_back({{"image_id", e.image_id}, {"message", e.message}});
  return json{{"source", to_string(source)},
              {"annotated", annotation.outcomes.size()},
              {"failed", annotation.errors.size()},
              {"fallback", annotation.fallback_count},
              {"fallback_rate", annotation.fallback_rate()},
              {"errors", errors}};
}

// ---- evaluation -------------------------------------------------------------

json eval_result_json(const EvalResult& r) {
  json per_image = json::array();
  for (const auto& p : r.per_image) per_image.push_back({{"image_id", p.image_id}, {"iou", p.iou}, {"hit", p.hit}});
  return json{{"tau_star", r.tau_star},
              {"max_box_acc", r.max_box_acc},
              {"mean_iou_at_tau", r.mean_iou_at_tau},
              {"delta", r.delta},
              {"mode", to_string(r.mode)},
              {"images", r.per_image.size()},
              {"per_image", per_image}};
}

std::string per_image_csv(const EvalResult& r) {
  std::string out = "image_id,iou,hit\n";
  for (const auto& p : r.per_image) {
    out += p.image_id + "," + format_double(p.iou) + "," + (p.hit ? "1" : "0") + "\n";
  }
  return out;
}

json curve_json(const BoxAccCurve& curve) {
  return json{{"delta", curve.delta}, {"thresholds", curve.grid.values()}, {"box_acc", curve.acc}};
}

json perturb_summary_json(const PerturbSummary& s) {
  json level{{"level", s.level}, {"max_deformation", 0.05 * s.level}, {"count", s.count}};
  level["mean_iou"] = s.mean_iou ? json(*s.mean_iou) : json(nullptr);
  json levels = json::array();
  if (s.count > 0) levels.push_back(level);
  return json{{"levels", levels}, {"count", s.count}};
}

// ---- runs -------------------------------------------------------------------

namespace {

std::vector<EpochRecord> epochs_from_json(const json& arr, const std::string& what) {
  std::vector<EpochRecord> out;
  if (arr.is_null()) return out;
  if (!arr.is_array()) throw ValidationError(what + " must be an array");
  for (const auto& e : arr) {
    EpochRecord r;
    if (!e.contains("epoch") || !e["epoch"].is_number_integer()) {
      throw ValidationError(what + ": every record needs an integer 'epoch'");
    }
    r.epoch = e["epoch"].get<int>();
    const std::string at = what + " epoch " + std::to_string(r.epoch);
    if (!e.contains("classification_acc") || !e["classification_acc"].is_number()) {
      throw ValidationError(at + ": missing numeric 'classification_acc'");
    }
    r.classification_acc = e["classification_acc"].get<double>();
    try {
      if (e.contains("loc_scores")) r.loc_scores = e["loc_scores"].get<std::map<std::string, double>>();
      if (e.contains("curves")) r.curves = e["curves"].get<std::map<std::string, std::vector<double>>>();
      if (e.contains("otsu_scores")) r.otsu_scores = e["otsu_scores"].get<std::map<std::string, double>>();
    } catch (const json::exception& ex) {
      throw ValidationError(at + ": " + ex.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

json epochs_json(const std::vector<EpochRecord>& series) {
  json arr = json::array();
  for (const auto& r : series) {
    json e{{"epoch", r.epoch}, {"classification_acc", r.classification_acc}};
    if (!r.loc_scores.empty()) e["loc_scores"] = r.loc_scores;
    if (!r.curves.empty()) e["curves"] = r.curves;
    if (!r.otsu_scores.empty()) e["otsu_scores"] = r.otsu_scores;
    arr.push_back(std::move(e));
  }
  return arr;
}

}  // namespace

RunManifest run_manifest_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("run manifest must be a JSON object");
  RunManifest run;
  if (!j.contains("run_id") || !j["run_id"].is_string()) {
    throw ValidationError("run manifest needs a string 'run_id'");
  }
  run.run_id = j["run_id"].get<std::string>();
  const std::string what = "run '" + run.run_id + "'";
  try {
    if (j.contains("config")) {
      for (const auto& [k, v] : j["config"].items()) run.config[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    if (j.contains("grid")) {
      const json& g = j["grid"];
      if (g.is_number_integer()) {
        run.grid = ThresholdGrid::uniform(g.get<std::size_t>()).values();
      } else {
        run.grid = g.get<std::vector<double>>();
      }
    }
  } catch (const json::exception& ex) {
    throw ValidationError(what + ": " + ex.what());
  }
  const json splits = j.value("splits", json::object());
  run.val = epochs_from_json(splits.value("val", json()), what + " val");
  run.test = epochs_from_json(splits.value("test", json()), what + " test");
  validate_run(run);
  return run;
}

json run_manifest_json(const RunManifest& run) {
  json splits = json::object();
  if (!run.val.empty()) splits["val"] = epochs_json(run.val);
  if (!run.test.empty()) splits["test"] = epochs_json(run.test);
  return json{{"run_id", run.run_id}, {"config", run.config}, {"grid", run.grid}, {"splits", splits}};
}

RunManifest read_run_manifest(const std::string& path) {
  try {
    return run_manifest_from_json(read_json_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError("'" + path + "': " + e.what());
  }
}

json protocol_matrix_json(std::span<const ProtocolCell> cells) {
  json arr = json::array();
  for (const auto& c : cells) {
    json cell{{"column", c.column()},
              {"config_axis", to_string(c.config_axis)},
              {"tau_axis", to_string(c.tau_axis)},
              {"source", c.source}};
    cell["value"] = c.value ? json(*c.value) : json(nullptr);
    cell["available"] = c.value.has_value();
    if (!c.run_id.empty()) cell["run_id"] = c.run_id;
    if (c.epoch) cell["epoch"] = *c.epoch;
    if (c.tau) cell["tau"] = *c.tau;
    if (!c.note.empty()) cell["note"] = c.note;
    arr.push_back(std::move(cell));
  }
  return json{{"cells", arr}};
}

std::string protocol_matrix_csv(std::span<const ProtocolCell> cells) {
  std::string out = "source";
  for (const auto& [config, tau] : kProtocolColumns) {
    out += std::string(",") + to_string(config) + "-" + to_string(tau);
  }
  out += "\n";
  for (std::size_t i = 0; i < cells.size(); i += kProtocolColumnCount) {
    out += cells[i].source;
    for (std::size_t k = 0; k < kProtocolColumnCount && i + k < cells.size(); ++k) {
      out += ",";
      if (cells[i + k].value) out += format_double(*cells[i + k].value);
    }
    out += "\n";
  }
  return out;
}

json histogram_json(const EpochDiffHistogram& hist) {
  json counts = json::array();
  for (const auto& [d, n] : hist.counts) counts.push_back({{"diff", d}, {"count", n}});
  return json{{"counts", counts}, {"mode", hist.mode}, {"mean", hist.mean}, {"runs", hist.diffs.size()}};
}

}  // namespace wsoleval
