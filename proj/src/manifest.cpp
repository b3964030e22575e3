#include "gansemble/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gansemble/errors.hpp"
#include "gansemble/rng.hpp"

namespace gansemble {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  if (s.rfind("0x", 0) != 0) {
    throw MissingArtifactError("manifest hash is not hex: " + s);
  }
  return std::stoull(s.substr(2), nullptr, 16);
}

}  // namespace

std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingArtifactError("cannot read " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  return fnv1a64(std::string_view(bytes));
}

void record_artifact(RunManifest& manifest, const std::filesystem::path& dir,
                     const std::string& relative_path) {
  const std::uint64_t hash = hash_file(dir / relative_path);
  for (ArtifactEntry& entry : manifest.artifacts) {
    if (entry.path == relative_path) {
      entry.hash = hash;
      return;
    }
  }
  manifest.artifacts.push_back({relative_path, hash});
}

void save_manifest(const std::filesystem::path& dir,
                   const RunManifest& manifest) {
  nlohmann::json j;
  j["format"] = "run-manifest-v1";
  j["tool"] = manifest.tool;
  j["version"] = manifest.version;
  j["config_hash"] = hex64(manifest.config_hash);
  j["master_seed"] = manifest.master_seed;
  j["created_at"] = manifest.created_at;
  j["updated_at"] = manifest.updated_at;
  j["last_command"] = manifest.last_command;
  nlohmann::json progress = nlohmann::json::object();
  for (const auto& [command, p] : manifest.progress) {
    progress[command] = {{"status", p.status},
                         {"completed", p.completed},
                         {"total", p.total}};
  }
  j["progress"] = progress;
  nlohmann::json artifacts = nlohmann::json::array();
  for (const ArtifactEntry& entry : manifest.artifacts) {
    artifacts.push_back({{"path", entry.path}, {"hash", hex64(entry.hash)}});
  }
  j["artifacts"] = artifacts;

  std::ofstream out(dir / "manifest.json");
  if (!out) {
    throw MissingArtifactError("cannot write " +
                               (dir / "manifest.json").string());
  }
  out << j.dump(2) << "\n";
  if (!out.good()) {
    throw MissingArtifactError("failed writing " +
                               (dir / "manifest.json").string());
  }
}

bool manifest_exists(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir / "manifest.json");
}

RunManifest load_manifest(const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) {
    throw MissingArtifactError("manifest not found: " + path.string());
  }
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != "run-manifest-v1") {
      throw MissingArtifactError("unsupported manifest format in " +
                                 path.string());
    }
    RunManifest manifest;
    manifest.tool = j.at("tool").get<std::string>();
    manifest.version = j.at("version").get<std::string>();
    manifest.config_hash = parse_hex64(j.at("config_hash").get<std::string>());
    manifest.master_seed = j.at("master_seed").get<std::uint64_t>();
    manifest.created_at = j.at("created_at").get<std::string>();
    manifest.updated_at = j.at("updated_at").get<std::string>();
    manifest.last_command = j.at("last_command").get<std::string>();
    for (const auto& [command, p] : j.at("progress").items()) {
      CommandProgress progress;
      progress.status = p.at("status").get<std::string>();
      progress.completed = p.at("completed").get<std::size_t>();
      progress.total = p.at("total").get<std::size_t>();
      if (progress.status != "complete" && progress.status != "partial") {
        throw MissingArtifactError("manifest progress status '" +
                                   progress.status + "' is not recognized");
      }
      manifest.progress[command] = progress;
    }
    for (const auto& entry : j.at("artifacts")) {
      manifest.artifacts.push_back(
          {entry.at("path").get<std::string>(),
           parse_hex64(entry.at("hash").get<std::string>())});
    }
    return manifest;
  } catch (const nlohmann::json::exception& e) {
    throw MissingArtifactError("manifest " + path.string() +
                               " is malformed: " + e.what());
  }
}

void verify_artifacts(const std::filesystem::path& dir,
                      const RunManifest& manifest) {
  for (const ArtifactEntry& entry : manifest.artifacts) {
    const std::filesystem::path path = dir / entry.path;
    if (!std::filesystem::exists(path)) {
      throw MissingArtifactError("manifest lists missing artifact " +
                                 path.string());
    }
    if (hash_file(path) != entry.hash) {
      throw MissingArtifactError("artifact content changed since recorded: " +
                                 path.string());
    }
  }
}

std::vector<std::string> find_orphans(const std::filesystem::path& dir,
                                      const RunManifest& manifest) {
  std::set<std::string> listed;
  for (const ArtifactEntry& entry : manifest.artifacts) {
    listed.insert(entry.path);
  }
  std::vector<std::string> orphans;
  for (const auto& item :
       std::filesystem::recursive_directory_iterator(dir)) {
    if (!item.is_regular_file()) continue;
    const std::string rel =
        std::filesystem::relative(item.path(), dir).generic_string();
    if (rel == "manifest.json") continue;
    if (!listed.count(rel)) orphans.push_back(rel);
  }
  std::sort(orphans.begin(), orphans.end());
  return orphans;
}

std::string current_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gansemble
