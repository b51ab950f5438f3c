#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wsoleval::cli {

/// Declared file kinds in a workspace manifest.
enum class FileFormat { Maps, Boxes, Proposals, Runs, Images };

std::optional<FileFormat> parse_file_format(const std::string& text);
const char* to_string(FileFormat format);

struct WorkspaceFile {
  std::filesystem::path path;  // resolved against the workspace root
  std::string declared_path;   // as written in the manifest
  FileFormat format;
  std::optional<std::string> split;
};

struct WorkspaceDefaults {
  std::optional<std::size_t> grid;
  std::optional<double> delta;
  std::optional<int> connectivity;
  std::optional<std::uint64_t> seed;
};

struct WorkspaceManifest {
  std::filesystem::path root;
  std::map<std::string, std::vector<std::string>> splits;  // train / val / test
  std::vector<WorkspaceFile> files;
  WorkspaceDefaults defaults;
};

/// Parses a manifest; relative paths resolve against `root` joined to the
/// manifest's "root" entry. Throws ValidationError on schema errors.
WorkspaceManifest parse_workspace(const nlohmann::json& j, const std::filesystem::path& base_dir);
WorkspaceManifest load_workspace(const std::string& path);

struct FileStatus {
  std::string path;
  std::string format;
  bool ok = true;
  std::vector<std::string> messages;
};

struct WorkspaceReport {
  std::vector<std::string> problems;  // manifest-level problems such as split overlap
  std::vector<FileStatus> files;
  bool valid() const;
};

/// Checks every referenced file's header or schema. Failures become report
/// entries; nothing is thrown for bad files.
WorkspaceReport validate_workspace(const WorkspaceManifest& manifest);
nlohmann::json report_json(const WorkspaceReport& report);

/// `<dir>/<image_id>.wslm` or `.png`, whichever exists.
std::optional<std::filesystem::path> find_map(const std::filesystem::path& dir, const std::string& image_id);

/// Regular files of a directory (or the path itself), sorted by name.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& path,
                                              const std::vector<std::string>& extensions = {});

}  // namespace wsoleval::cli
