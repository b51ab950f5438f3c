#include "workspace.hpp"

#include <algorithm>
#include <set>

#include "wsoleval/error.hpp"
#include "wsoleval/io.hpp"

namespace wsoleval::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<FileFormat> parse_file_format(const std::string& text) {
  if (text == "maps" || text == "wslm" || text == "png") return FileFormat::Maps;
  if (text == "boxes") return FileFormat::Boxes;
  if (text == "proposals") return FileFormat::Proposals;
  if (text == "runs") return FileFormat::Runs;
  if (text == "images") return FileFormat::Images;
  return std::nullopt;
}

const char* to_string(FileFormat format) {
  switch (format) {
    case FileFormat::Maps: return "maps";
    case FileFormat::Boxes: return "boxes";
    case FileFormat::Proposals: return "proposals";
    case FileFormat::Runs: return "runs";
    case FileFormat::Images: return "images";
  }
  return "maps";
}

WorkspaceManifest parse_workspace(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ValidationError("workspace manifest must be a JSON object");
  WorkspaceManifest m;
  m.root = base_dir;
  if (j.contains("root")) {
    if (!j["root"].is_string()) throw ValidationError("workspace 'root' must be a string");
    m.root = base_dir / j["root"].get<std::string>();
  }
  if (j.contains("splits")) {
    if (!j["splits"].is_object()) throw ValidationError("workspace 'splits' must be an object");
    for (const auto& [name, ids] : j["splits"].items()) {
      if (!ids.is_array()) throw ValidationError("split '" + name + "' must be a list of image ids");
      auto& list = m.splits[name];
      for (const auto& id : ids) {
        if (!id.is_string()) throw ValidationError("split '" + name + "' holds a non-string image id");
        list.push_back(id.get<std::string>());
      }
    }
  }
  if (j.contains("files")) {
    if (!j["files"].is_array()) throw ValidationError("workspace 'files' must be a list");
    std::size_t index = 0;
    for (const auto& f : j["files"]) {
      const std::string where = "files[" + std::to_string(index++) + "]";
      if (!f.is_object() || !f.contains("path") || !f["path"].is_string()) {
        throw ValidationError(where + " needs a string 'path'");
      }
      if (!f.contains("format") || !f["format"].is_string()) throw ValidationError(where + " needs a 'format'");
      const auto format = parse_file_format(f["format"].get<std::string>());
      if (!format) {
        throw ValidationError(where + ": unknown format '" + f["format"].get<std::string>() +
                              "' (expected maps, boxes, proposals, runs or images)");
      }
      WorkspaceFile file{m.root / f["path"].get<std::string>(), f["path"].get<std::string>(), *format, std::nullopt};
      if (f.contains("split")) file.split = f["split"].get<std::string>();
      m.files.push_back(std::move(file));
    }
  }
  if (j.contains("defaults")) {
    const json& d = j["defaults"];
    if (d.contains("grid")) m.defaults.grid = d["grid"].get<std::size_t>();
    if (d.contains("delta")) m.defaults.delta = d["delta"].get<double>();
    if (d.contains("connectivity")) m.defaults.connectivity = d["connectivity"].get<int>();
    if (d.contains("seed")) m.defaults.seed = d["seed"].get<std::uint64_t>();
  }
  return m;
}

WorkspaceManifest load_workspace(const std::string& path) {
  const json j = read_json_file(path);
  try {
    return parse_workspace(j, fs::path(path).parent_path());
  } catch (const json::exception& e) {
    throw ValidationError("'" + path + "': " + e.what());
  }
}

bool WorkspaceReport::valid() const {
  return problems.empty() && std::all_of(files.begin(), files.end(), [](const FileStatus& f) { return f.ok; });
}

std::optional<fs::path> find_map(const fs::path& dir, const std::string& image_id) {
  for (const char* ext : {".wslm", ".png"}) {
    fs::path p = dir / (image_id + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

std::vector<fs::path> list_files(const fs::path& path, const std::vector<std::string>& extensions) {
  std::vector<fs::path> out;
  if (fs::is_regular_file(path)) return {path};
  if (!fs::is_directory(path)) throw IoError("'" + path.string() + "' does not exist");
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (extensions.empty() || std::find(extensions.begin(), extensions.end(), ext) != extensions.end()) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void check_box_file(const WorkspaceFile& file, const fs::path& path, const std::set<std::string>& known,
                    const std::set<std::string>& split_ids, FileStatus& status) {
  const auto rows =
      read_box_rows(path.string(), file.format == FileFormat::Proposals ? RowSchema::Proposal : RowSchema::Box);
  for (const auto& issue : rows.issues) {
    status.messages.push_back(path.string() + ":" + std::to_string(issue.line) + ": " + issue.message);
  }
  if (known.empty()) return;
  for (const auto& row : rows.rows) {
    const auto& ids = file.split ? split_ids : known;
    if (!ids.count(row.image_id)) {
      status.messages.push_back(path.string() + ":" + std::to_string(row.line) + ": unknown image id '" +
                                row.image_id + "'" + (file.split ? " in split '" + *file.split + "'" : ""));
    }
  }
}

}  // namespace

WorkspaceReport validate_workspace(const WorkspaceManifest& m) {
  WorkspaceReport report;
  std::map<std::string, std::string> owner;
  std::set<std::string> known;
  for (const auto& [split, ids] : m.splits) {
    for (const auto& id : ids) {
      const auto [it, inserted] = owner.emplace(id, split);
      if (!inserted && it->second != split) {
        report.problems.push_back("image id '" + id + "' appears in splits '" + it->second + "' and '" + split + "'");
      }
      known.insert(id);
    }
  }

  for (const auto& file : m.files) {
    FileStatus status{file.path.string(), to_string(file.format), true, {}};
    std::set<std::string> split_ids;
    if (file.split) {
      const auto it = m.splits.find(*file.split);
      if (it == m.splits.end()) {
        status.messages.push_back("undeclared split '" + *file.split + "'");
      } else {
        split_ids.insert(it->second.begin(), it->second.end());
      }
    }
    try {
      switch (file.format) {
        case FileFormat::Maps:
          for (const auto& p : list_files(file.path, {".wslm", ".png"})) {
            try {
              check_locmap_header(p.string());
            } catch (const Error& e) {
              status.messages.push_back(e.what());
            }
            const std::string id = p.stem().string();
            if (!known.empty() && !(file.split ? split_ids : known).count(id)) {
              status.messages.push_back(p.string() + ": unknown image id '" + id + "'");
            }
          }
          break;
        case FileFormat::Boxes:
        case FileFormat::Proposals:
          for (const auto& p : list_files(file.path, {".jsonl"})) check_box_file(file, p, known, split_ids, status);
          break;
        case FileFormat::Runs:
          for (const auto& p : list_files(file.path, {".json"})) {
            try {
              read_run_manifest(p.string());
            } catch (const Error& e) {
              status.messages.push_back(e.what());
            }
          }
          break;
        case FileFormat::Images:
          for (const auto& p : list_files(file.path, {".png", ".ppm"})) {
            try {
              read_image(p.string());
            } catch (const Error& e) {
              status.messages.push_back(e.what());
            }
          }
          break;
      }
    } catch (const Error& e) {
      status.messages.push_back(e.what());
    }
    status.ok = status.messages.empty();
    report.files.push_back(std::move(status));
  }
  return report;
}

json report_json(const WorkspaceReport& report) {
  json files = json::array();
  for (const auto& f : report.files) {
    files.push_back({{"path", f.path}, {"format", f.format}, {"status", f.ok ? "ok" : "error"}, {"messages", f.messages}});
  }
  return json{{"valid", report.valid()}, {"problems", report.problems}, {"files", files}};
}

}  // namespace wsoleval::cli
