#include "gansemble/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gansemble/errors.hpp"
#include "gansemble/rng.hpp"

namespace gansemble {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0;
  std::size_t hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (value.empty() || value[0] == '-') throw std::invalid_argument(value);
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' needs a non-negative integer, got '" +
                      value + "'");
  }
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' needs a number, got '" +
                      value + "'");
  }
}

std::vector<std::size_t> parse_size_list(const std::string& key,
                                         const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_size(key, trim(item)));
  }
  if (out.empty()) {
    throw ConfigError("config key '" + key + "' needs at least one value");
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_sizes(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

std::string profile_name(Profile profile) {
  return profile == Profile::kCi ? "ci" : "paper";
}

Profile profile_from_name(const std::string& name) {
  if (name == "ci") return Profile::kCi;
  if (name == "paper") return Profile::kPaper;
  throw ConfigError("unknown profile '" + name + "' (expected ci or paper)");
}

std::string method_name(Method method) {
  return method == Method::kIndependent ? "independent" : "boosted";
}

Method method_from_name(const std::string& name) {
  if (name == "independent") return Method::kIndependent;
  if (name == "boosted") return Method::kBoosted;
  throw ConfigError("unknown method '" + name +
                    "' (expected independent or boosted)");
}

ExperimentConfig default_config(Profile profile) {
  ExperimentConfig config;
  config.profile = profile;
  config.downstream.classifier.epochs = 200;
  if (profile == Profile::kCi) {
    config.dataset_size = 10000;
    config.pool_size = 10;
    config.samples_per_member = 12500;
    config.gan.epochs = 40;
    config.gan.gen_widths = {64, 64};
    config.gan.disc_widths = {48, 48};
  } else {
    config.dataset_size = 100000;
    config.pool_size = 25;
    config.samples_per_member = 125000;
    config.gan.epochs = 400;
    config.gan.gen_widths = {400, 400, 400, 400};
    config.gan.disc_widths = {200, 200, 200};
  }
  return config;
}

ExperimentConfig parse_config_text(const std::string& text,
                                   std::optional<Profile> profile_override) {
  std::map<std::string, std::string> pairs;
  std::stringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " is not key = value: '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " has an empty key or value");
    }
    if (!pairs.emplace(key, value).second) {
      throw ConfigError("duplicate config key '" + key + "'");
    }
  }

  Profile profile = Profile::kCi;
  if (profile_override) {
    profile = *profile_override;
  } else if (auto it = pairs.find("profile"); it != pairs.end()) {
    profile = profile_from_name(it->second);
  }
  pairs.erase("profile");

  ExperimentConfig config = default_config(profile);
  for (const auto& [key, value] : pairs) {
    if (key == "method") {
      config.method = method_from_name(value);
    } else if (key == "master_seed") {
      config.master_seed = parse_u64(key, value);
    } else if (key == "out_dir") {
      config.out_dir = value;
    } else if (key == "label_scheme") {
      config.scheme = label_scheme_from_name(value);
    } else if (key == "grid_side") {
      config.grid.grid_side = parse_size(key, value);
    } else if (key == "spacing") {
      config.grid.spacing = parse_double(key, value);
    } else if (key == "origin") {
      config.grid.origin = parse_double(key, value);
    } else if (key == "sigma") {
      config.grid.sigma = parse_double(key, value);
    } else if (key == "dataset_size") {
      config.dataset_size = parse_size(key, value);
    } else if (key == "pool_size") {
      config.pool_size = parse_size(key, value);
    } else if (key == "samples_per_member") {
      config.samples_per_member = parse_size(key, value);
    } else if (key == "ensemble_sizes") {
      config.ensemble_sizes = parse_size_list(key, value);
    } else if (key == "epochs") {
      config.gan.epochs = parse_size(key, value);
    } else if (key == "batch_size") {
      config.gan.batch_size = parse_size(key, value);
    } else if (key == "latent_dim") {
      config.gan.latent_dim = parse_size(key, value);
    } else if (key == "gen_hidden") {
      config.gan.gen_widths = parse_size_list(key, value);
    } else if (key == "disc_hidden") {
      config.gan.disc_widths = parse_size_list(key, value);
    } else if (key == "maxout_pool") {
      config.gan.maxout_pool = parse_size(key, value);
    } else if (key == "d_steps") {
      config.gan.d_steps_per_g_step = parse_size(key, value);
    } else if (key == "learning_rate") {
      config.gan.adam.learning_rate = parse_double(key, value);
    } else if (key == "adam_beta1") {
      config.gan.adam.beta1 = parse_double(key, value);
    } else if (key == "adam_beta2") {
      config.gan.adam.beta2 = parse_double(key, value);
    } else if (key == "adam_epsilon") {
      config.gan.adam.epsilon = parse_double(key, value);
    } else if (key == "bootstrap_samples") {
      config.bootstrap.n_eval = parse_size(key, value);
    } else if (key == "bootstrap_iterations") {
      config.bootstrap.iterations = parse_size(key, value);
    } else if (key == "classifier_hidden") {
      config.downstream.classifier.hidden_widths = parse_size_list(key, value);
    } else if (key == "classifier_epochs") {
      config.downstream.classifier.epochs = parse_size(key, value);
    } else if (key == "classifier_batch") {
      config.downstream.classifier.batch_size = parse_size(key, value);
    } else if (key == "classifier_eval_every") {
      config.downstream.classifier.eval_every = parse_size(key, value);
    } else if (key == "classifier_learning_rate") {
      config.downstream.classifier.adam.learning_rate =
          parse_double(key, value);
    } else if (key == "downstream_seeds") {
      config.downstream.seeds = parse_size(key, value);
    } else if (key == "tail_fraction") {
      config.downstream.tail_fraction = parse_double(key, value);
    } else if (key == "heatmap_resolution") {
      config.heatmap_resolution = parse_size(key, value);
    } else if (key == "nn_audit_top") {
      config.nn_audit_top = parse_size(key, value);
    } else if (key == "frechet_samples") {
      config.frechet_samples = parse_size(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return config;
}

ExperimentConfig load_experiment_config(
    const std::filesystem::path& path,
    std::optional<Profile> profile_override) {
  std::ifstream in(path);
  if (!in) {
    throw MissingArtifactError("config file not found: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), profile_override);
}

void validate_experiment(const ExperimentConfig& config) {
  validate_config(config.gan);
  validate_classifier_config(config.downstream.classifier);
  if (config.grid.grid_side == 0) throw ConfigError("grid_side must be >= 1");
  if (!(config.grid.spacing > 0.0)) throw ConfigError("spacing must be positive");
  if (!(config.grid.sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (config.pool_size == 0) throw ConfigError("pool_size must be >= 1");
  if (config.dataset_size < config.gan.batch_size) {
    throw ConfigError("dataset_size is smaller than one training batch");
  }
  if (config.ensemble_sizes.empty()) {
    throw ConfigError("ensemble_sizes must list at least one size");
  }
  for (std::size_t t : config.ensemble_sizes) {
    if (t == 0) throw ConfigError("ensemble sizes must be >= 1");
  }
  if (config.bootstrap.n_eval == 0 || config.bootstrap.iterations == 0) {
    throw ConfigError("bootstrap settings must be >= 1");
  }
  if (config.samples_per_member < config.bootstrap.n_eval) {
    throw ConfigError(
        "samples_per_member must cover one full bootstrap draw (>= " +
        std::to_string(config.bootstrap.n_eval) + ")");
  }
  if (config.downstream.seeds == 0) {
    throw ConfigError("downstream_seeds must be >= 1");
  }
  if (!(config.downstream.tail_fraction > 0.0) ||
      config.downstream.tail_fraction > 1.0) {
    throw ConfigError("tail_fraction must be in (0, 1]");
  }
  if (config.heatmap_resolution == 0) {
    throw ConfigError("heatmap_resolution must be >= 1");
  }
  if (config.nn_audit_top == 0) throw ConfigError("nn_audit_top must be >= 1");
  if (config.frechet_samples < 2) {
    throw ConfigError("frechet_samples must be >= 2");
  }
}

std::string canonical_config_text(const ExperimentConfig& config) {
  std::string out;
  auto put = [&](const std::string& key, const std::string& value) {
    out += key + "=" + value + "\n";
  };
  put("profile", profile_name(config.profile));
  put("method", method_name(config.method));
  put("master_seed", std::to_string(config.master_seed));
  put("label_scheme", label_scheme_name(config.scheme));
  put("grid_side", std::to_string(config.grid.grid_side));
  put("spacing", fmt_double(config.grid.spacing));
  put("origin", fmt_double(config.grid.origin));
  put("sigma", fmt_double(config.grid.sigma));
  put("dataset_size", std::to_string(config.dataset_size));
  put("pool_size", std::to_string(config.pool_size));
  put("samples_per_member", std::to_string(config.samples_per_member));
  put("ensemble_sizes", join_sizes(config.ensemble_sizes));
  put("epochs", std::to_string(config.gan.epochs));
  put("batch_size", std::to_string(config.gan.batch_size));
  put("latent_dim", std::to_string(config.gan.latent_dim));
  put("gen_hidden", join_sizes(config.gan.gen_widths));
  put("disc_hidden", join_sizes(config.gan.disc_widths));
  put("maxout_pool", std::to_string(config.gan.maxout_pool));
  put("d_steps", std::to_string(config.gan.d_steps_per_g_step));
  put("learning_rate", fmt_double(config.gan.adam.learning_rate));
  put("adam_beta1", fmt_double(config.gan.adam.beta1));
  put("adam_beta2", fmt_double(config.gan.adam.beta2));
  put("adam_epsilon", fmt_double(config.gan.adam.epsilon));
  put("bootstrap_samples", std::to_string(config.bootstrap.n_eval));
  put("bootstrap_iterations", std::to_string(config.bootstrap.iterations));
  put("classifier_hidden",
      join_sizes(config.downstream.classifier.hidden_widths));
  put("classifier_epochs",
      std::to_string(config.downstream.classifier.epochs));
  put("classifier_batch",
      std::to_string(config.downstream.classifier.batch_size));
  put("classifier_eval_every",
      std::to_string(config.downstream.classifier.eval_every));
  put("classifier_learning_rate",
      fmt_double(config.downstream.classifier.adam.learning_rate));
  put("downstream_seeds", std::to_string(config.downstream.seeds));
  put("tail_fraction", fmt_double(config.downstream.tail_fraction));
  put("heatmap_resolution", std::to_string(config.heatmap_resolution));
  put("nn_audit_top", std::to_string(config.nn_audit_top));
  put("frechet_samples", std::to_string(config.frechet_samples));
  return out;
}

std::uint64_t experiment_hash(const ExperimentConfig& config) {
  return fnv1a64(canonical_config_text(config));
}

}  // namespace gansemble
