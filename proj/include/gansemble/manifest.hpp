#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gansemble {

// FNV-1a over the file's raw bytes; MissingArtifactError if unreadable.
std::uint64_t hash_file(const std::filesystem::path& path);

struct ArtifactEntry {
  std::string path;  // relative to the manifest's directory
  std::uint64_t hash = 0;
};

struct CommandProgress {
  std::string status = "complete";  // "complete" | "partial"
  std::size_t completed = 0;
  std::size_t total = 0;
};

// One manifest per run directory records what produced the artifacts and
// how far each command got; timestamps are informational only and carry no
// behavior.
struct RunManifest {
  std::string tool = "gansemble";
  std::string version;
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  std::string created_at;
  std::string updated_at;
  std::string last_command;
  std::map<std::string, CommandProgress> progress;
  std::vector<ArtifactEntry> artifacts;
};

// Adds or refreshes (by path) one artifact entry, hashing the file on disk.
void record_artifact(RunManifest& manifest, const std::filesystem::path& dir,
                     const std::string& relative_path);

void save_manifest(const std::filesystem::path& dir,
                   const RunManifest& manifest);

// MissingArtifactError when absent or malformed.
RunManifest load_manifest(const std::filesystem::path& dir);

bool manifest_exists(const std::filesystem::path& dir);

// Checks that every listed artifact exists with its recorded hash; throws
// MissingArtifactError naming the first offender.
void verify_artifacts(const std::filesystem::path& dir,
                      const RunManifest& manifest);

// Files under dir (recursive) that are neither listed nor the manifest
// itself; a clean run has none.
std::vector<std::string> find_orphans(const std::filesystem::path& dir,
                                      const RunManifest& manifest);

// RFC 3339 UTC, second resolution.
std::string current_timestamp();

}  // namespace gansemble
