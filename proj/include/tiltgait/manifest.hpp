#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tiltgait {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct ArtifactEntry {
  std::string path;  // relative to the manifest's output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunRecord {
  std::string run_id;
  std::string status;
  std::string diagnostic;
  double sup_error = 0.0;
};

/// Writes `content` to root/relative, creating parents, and returns its index entry.
/// Touches nothing shared, so workers may call it for distinct paths concurrently.
ArtifactEntry write_file_artifact(const std::filesystem::path& root, const std::string& relative,
                                  std::string_view content);

/// Index of everything one CLI invocation wrote. Files enter the index only
/// through write_artifact/add_artifact, which checksum them on the spot.
struct RunManifest {
  std::string config_path;
  std::filesystem::path output_dir;
  std::string sweep_id;
  std::vector<std::string> gaits;
  std::vector<double> periods;
  std::map<std::string, int> scales;
  std::vector<std::string> decouplers;
  std::vector<std::string> references;
  std::vector<RunRecord> runs;
  std::vector<ArtifactEntry> artifacts;

  /// Writes `content` to output_dir/relative (creating parents) and indexes it.
  void write_artifact(const std::string& relative, std::string_view content);
  /// Indexes a file already present under output_dir.
  void add_artifact(const std::string& relative);

  std::string to_json() const;
  /// Writes manifest.json into output_dir. The manifest is not self-indexed.
  void save() const;
};

/// Relative paths whose current content no longer matches the recorded checksum.
std::vector<std::string> verify_artifacts(const std::filesystem::path& manifest_json);

/// Short stable identifier derived from the canonical config text.
std::string sweep_id_for(std::string_view canonical_config);

}  // namespace tiltgait
