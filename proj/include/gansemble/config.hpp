#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gansemble/downstream.hpp"
#include "gansemble/gan.hpp"
#include "gansemble/grid.hpp"

namespace gansemble {

inline constexpr const char* kToolName = "gansemble";
inline constexpr const char* kToolVersion = "1.0.0";

enum class Profile { kCi, kPaper };
enum class Method { kIndependent, kBoosted };

std::string profile_name(Profile profile);
Profile profile_from_name(const std::string& name);
std::string method_name(Method method);
Method method_from_name(const std::string& name);

struct BootstrapSettings {
  std::size_t n_eval = 2500;
  std::size_t iterations = 1000;
};

struct DownstreamSettings {
  ClassifierConfig classifier;
  std::size_t seeds = 10;
  double tail_fraction = 0.25;
};

// Everything one experiment needs, resolved from profile defaults plus a
// flat key=value config file plus command-line overrides.
struct ExperimentConfig {
  Profile profile = Profile::kCi;
  Method method = Method::kIndependent;
  GridSpec grid;
  GanConfig gan;
  std::size_t dataset_size = 10000;
  std::size_t pool_size = 10;
  std::size_t samples_per_member = 12500;
  std::vector<std::size_t> ensemble_sizes = {1, 2, 3, 4, 5};
  LabelScheme scheme = LabelScheme::kCheckerboard;
  BootstrapSettings bootstrap;
  DownstreamSettings downstream;
  std::size_t heatmap_resolution = 100;
  std::size_t nn_audit_top = 100;
  std::size_t frechet_samples = 10000;
  std::uint64_t master_seed = 0;
  std::filesystem::path out_dir = "runs/default";
};

// Profile defaults: ci is a reduced schedule (10K points, 40 epochs, small
// networks, pool of 10); paper is the full protocol (100K points, 400
// epochs, 400/200-wide networks, pool of 25, 125K cached samples each).
ExperimentConfig default_config(Profile profile);

// Flat key=value text (one pair per line, '#' comments). Unknown or
// duplicate keys and malformed values are ConfigErrors. The profile key is
// applied first (overridden by the optional argument, e.g. a --profile
// flag); every other key then overrides that profile's defaults.
ExperimentConfig parse_config_text(const std::string& text,
                                   std::optional<Profile> profile_override);

// parse_config_text over a file; missing file is a MissingArtifactError.
ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        std::optional<Profile> profile_override);

void validate_experiment(const ExperimentConfig& config);

// Canonical key=value dump of every field that affects results, in fixed
// order. out_dir is excluded: the same experiment in a different directory
// must hash identically.
std::string canonical_config_text(const ExperimentConfig& config);

std::uint64_t experiment_hash(const ExperimentConfig& config);

}  // namespace gansemble
