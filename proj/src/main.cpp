#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gansemble/config.hpp"
#include "gansemble/downstream.hpp"
#include "gansemble/ensemble.hpp"
#include "gansemble/errors.hpp"
#include "gansemble/gan.hpp"
#include "gansemble/grid.hpp"
#include "gansemble/manifest.hpp"
#include "gansemble/metrics.hpp"
#include "gansemble/rng.hpp"

namespace gansemble {
namespace {

namespace fs = std::filesystem;

std::string zero_pad(const char* pattern, std::size_t value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, value);
  return buf;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Manifest plumbing shared by every subcommand.

RunManifest open_manifest(const ExperimentConfig& config,
                          const std::string& command) {
  fs::create_directories(config.out_dir);
  const std::uint64_t hash = experiment_hash(config);
  RunManifest manifest;
  if (manifest_exists(config.out_dir)) {
    manifest = load_manifest(config.out_dir);
    if (manifest.config_hash != hash) {
      throw ConfigError(
          "run directory " + config.out_dir.string() +
          " was produced by a different configuration; refusing to mix "
          "results (use a fresh --out or the original config)");
    }
  } else {
    manifest.version = kToolVersion;
    manifest.config_hash = hash;
    manifest.master_seed = config.master_seed;
    manifest.created_at = current_timestamp();
    std::ofstream lock(config.out_dir / "config.lock");
    if (!lock) {
      throw MissingArtifactError("cannot write " +
                                 (config.out_dir / "config.lock").string());
    }
    lock << canonical_config_text(config);
    lock.close();
    record_artifact(manifest, config.out_dir, "config.lock");
  }
  manifest.last_command = command;
  return manifest;
}

void commit_manifest(const ExperimentConfig& config, RunManifest& manifest) {
  manifest.updated_at = current_timestamp();
  save_manifest(config.out_dir, manifest);
}

void record_member_files(RunManifest& manifest, const fs::path& dir,
                         const std::string& base) {
  record_artifact(manifest, dir, base + ".gen.ckpt");
  record_artifact(manifest, dir, base + ".disc.ckpt");
  record_artifact(manifest, dir, base + ".json");
}

void record_dataset_files(RunManifest& manifest, const fs::path& dir,
                          const std::string& name) {
  record_artifact(manifest, dir, name);
  record_artifact(manifest, dir, name + ".meta.json");
}

void record_mixture_files(RunManifest& manifest, const fs::path& dir,
                          const std::string& mixture_dir,
                          std::size_t member_count) {
  record_artifact(manifest, dir, mixture_dir + "/mixture.json");
  for (std::size_t i = 0; i < member_count; ++i) {
    record_member_files(manifest, dir,
                        mixture_dir + "/" + zero_pad("member_%03zu", i));
  }
}

// The training set doubles as the nearest-neighbor audit reference; the
// test set drives downstream evaluation. Both are deterministic functions
// of the master seed, so a missing file is regenerated rather than failed.
LabeledDataset ensure_dataset(const ExperimentConfig& config,
                              RunManifest& manifest, const std::string& name,
                              const char* purpose) {
  const fs::path path = config.out_dir / name;
  if (fs::exists(path)) {
    return load_dataset(path);
  }
  const std::uint64_t seed = derive_seed(config.master_seed, purpose);
  Tensor points = sample_real(config.grid, config.dataset_size, seed);
  LabeledDataset ds = assign_labels(points, config.grid, config.scheme, seed);
  save_dataset(path, ds);
  record_dataset_files(manifest, config.out_dir, name);
  std::cout << "wrote " << name << " (" << ds.size() << " points)\n";
  return ds;
}

std::uint64_t pool_member_seed(const ExperimentConfig& config,
                               std::size_t index) {
  return derive_seed(config.master_seed, "pool", index);
}

GanMember load_pool_member(const ExperimentConfig& config, std::size_t index) {
  return load_member(config.out_dir / "pool" /
                     zero_pad("member_%03zu", index));
}

// ---------------------------------------------------------------------------
// train-pool

int cmd_train_pool(const ExperimentConfig& config, std::size_t workers,
                   bool resume) {
  RunManifest manifest = open_manifest(config, "train-pool");
  CommandProgress& progress = manifest.progress["train-pool"];
  if (progress.total == 0) progress = {"partial", 0, config.pool_size};
  if (progress.status == "complete") {
    std::cout << "train-pool already complete for this configuration; "
                 "nothing to do\n";
    return 0;
  }
  if (progress.completed > 0 && !resume) {
    throw ConfigError("train-pool is partially complete (" +
                      std::to_string(progress.completed) + "/" +
                      std::to_string(progress.total) +
                      " members); rerun with --resume to continue");
  }

  LabeledDataset data = ensure_dataset(config, manifest, "dataset.csv",
                                       "dataset");
  if (config.dataset_size < config.gan.batch_size) {
    throw ConfigError("dataset is smaller than one training batch");
  }
  WeightedDataset train_data = WeightedDataset::uniform(data.points);
  const fs::path pool_dir = config.out_dir / "pool";
  fs::create_directories(pool_dir);

  std::vector<GanMember> members(config.pool_size);
  for (std::size_t i = 0; i < progress.completed; ++i) {
    members[i] = load_pool_member(config, i);
  }

  std::size_t next = progress.completed;
  while (next < config.pool_size) {
    const std::size_t wave_end =
        std::min(config.pool_size, next + std::max<std::size_t>(workers, 1));
    if (wave_end - next == 1) {
      GanConfig c = config.gan;
      c.seed = pool_member_seed(config, next);
      members[next] = train_gan(train_data, c);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t i = next; i < wave_end; ++i) {
        threads.emplace_back([&, i] {
          GanConfig c = config.gan;
          c.seed = pool_member_seed(config, i);
          members[i] = train_gan(train_data, c);
        });
      }
      for (std::thread& t : threads) t.join();
    }
    for (std::size_t i = next; i < wave_end; ++i) {
      const std::string base = zero_pad("member_%03zu", i);
      save_member(pool_dir / base, members[i]);
      record_member_files(manifest, config.out_dir, "pool/" + base);
      std::cout << "trained pool member " << (i + 1) << "/"
                << config.pool_size << "\n";
    }
    next = wave_end;
    progress = {"partial", next, config.pool_size};
    commit_manifest(config, manifest);
  }

  SamplePool pool = bootstrap_pool(members, config.samples_per_member);
  save_pool(pool_dir, pool);
  record_artifact(manifest, config.out_dir, "pool/pool.json");
  for (std::size_t i = 0; i < config.pool_size; ++i) {
    record_artifact(manifest, config.out_dir,
                    "pool/" + zero_pad("pool_cache_%03zu.csv", i));
  }
  progress = {"complete", config.pool_size, config.pool_size};
  commit_manifest(config, manifest);
  std::cout << "pool of " << config.pool_size << " members ready with "
            << config.samples_per_member << " cached samples each\n";
  return 0;
}

// ---------------------------------------------------------------------------
// boost

int cmd_boost(const ExperimentConfig& config, bool resume) {
  if (config.method != Method::kBoosted) {
    throw ConfigError("boost requires method = boosted in the config");
  }
  RunManifest manifest = open_manifest(config, "boost");
  const std::size_t target = *std::max_element(config.ensemble_sizes.begin(),
                                               config.ensemble_sizes.end());
  CommandProgress& progress = manifest.progress["boost"];
  if (progress.total == 0) progress = {"partial", 0, target};
  if (progress.status == "complete") {
    std::cout << "boost already complete for this configuration; "
                 "nothing to do\n";
    return 0;
  }
  if (progress.completed > 0 && !resume) {
    throw ConfigError("boost is partially complete (" +
                      std::to_string(progress.completed) + "/" +
                      std::to_string(progress.total) +
                      " iterations); rerun with --resume to continue");
  }

  LabeledDataset data = ensure_dataset(config, manifest, "dataset.csv",
                                       "dataset");
  const std::size_t classes = static_cast<std::size_t>(data.class_count);
  const fs::path boost_dir = config.out_dir / "boost";
  fs::create_directories(boost_dir);

  const std::size_t start = progress.completed;
  EnsembleMixture mix;
  mix.iterations = start;
  mix.class_count = classes;
  mix.master_seed = config.master_seed;
  mix.spec = config.grid;
  mix.scheme = config.scheme;
  mix.members.resize(start * classes);
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t t = 0; t < start; ++t) {
      std::string base = "member_t" + zero_pad("%02zu", t + 1) + "_k" +
                         zero_pad("%02zu", k);
      mix.members[k * start + t] = {load_member(boost_dir / base),
                                    1.0 / static_cast<double>(start), k};
    }
  }

  BoostHooks hooks;
  hooks.on_weights = [&](const BoostState& state) {
    const std::string name = "weights_t" +
                             zero_pad("%02zu", state.iteration) + "_k" +
                             zero_pad("%02zu", state.class_id) + ".csv";
    std::ofstream out(boost_dir / name);
    if (!out) {
      throw MissingArtifactError("cannot write " +
                                 (boost_dir / name).string());
    }
    out << "index,weight\n";
    for (std::size_t i = 0; i < state.weights.size(); ++i) {
      out << i << "," << fmt_double(state.weights[i]) << "\n";
    }
  };
  hooks.on_iteration = [&](EnsembleMixture& m, std::size_t t) {
    for (std::size_t k = 0; k < classes; ++k) {
      std::string base = "member_t" + zero_pad("%02zu", t) + "_k" +
                         zero_pad("%02zu", k);
      save_member(boost_dir / base,
                  m.members[k * m.iterations + (t - 1)].member);
      record_member_files(manifest, config.out_dir, "boost/" + base);
      record_artifact(manifest, config.out_dir,
                      "boost/weights_t" + zero_pad("%02zu", t) + "_k" +
                          zero_pad("%02zu", k) + ".csv");
    }
    manifest.progress["boost"] = {"partial", t, target};
    commit_manifest(config, manifest);
    std::cout << "boosting iteration " << t << "/" << target << " done\n";
  };

  continue_boosted(mix, data, target, config.gan, {}, hooks);

  save_mixture(config.out_dir / "boost" / "mixture", mix);
  record_mixture_files(manifest, config.out_dir, "boost/mixture",
                       mix.members.size());
  manifest.progress["boost"] = {"complete", target, target};
  commit_manifest(config, manifest);
  std::cout << "boosted mixture of " << target << " iterations x " << classes
            << " classes ready\n";
  return 0;
}

// ---------------------------------------------------------------------------
// assemble

EnsembleMixture assemble_mixture(const ExperimentConfig& config,
                                 std::size_t ensemble_size) {
  EnsembleMixture mix;
  mix.iterations = ensemble_size;
  mix.master_seed = config.master_seed;
  mix.spec = config.grid;
  mix.scheme = LabelScheme::kNone;
  if (config.method == Method::kIndependent) {
    if (ensemble_size > config.pool_size) {
      throw ConfigError("ensemble size " + std::to_string(ensemble_size) +
                        " exceeds the trained pool (pool_size = " +
                        std::to_string(config.pool_size) + ")");
    }
    mix.class_count = 1;
    for (std::size_t i = 0; i < ensemble_size; ++i) {
      mix.members.push_back({load_pool_member(config, i),
                             1.0 / static_cast<double>(ensemble_size), 0});
    }
  } else {
    EnsembleMixture full =
        load_mixture(config.out_dir / "boost" / "mixture");
    if (ensemble_size > full.iterations) {
      throw ConfigError("ensemble size " + std::to_string(ensemble_size) +
                        " exceeds the boosted mixture (" +
                        std::to_string(full.iterations) + " iterations)");
    }
    mix.class_count = full.class_count;
    for (std::size_t k = 0; k < full.class_count; ++k) {
      for (std::size_t t = 0; t < ensemble_size; ++t) {
        EnsembleMember member =
            std::move(full.members[k * full.iterations + t]);
        member.weight = 1.0 / static_cast<double>(ensemble_size);
        mix.members.push_back(std::move(member));
      }
    }
  }
  validate_mixture(mix);
  return mix;
}

int cmd_assemble(const ExperimentConfig& config) {
  RunManifest manifest = open_manifest(config, "assemble");
  fs::create_directories(config.out_dir / "mixtures");
  for (std::size_t t : config.ensemble_sizes) {
    EnsembleMixture mix = assemble_mixture(config, t);
    const std::string name = "mixture_T" + std::to_string(t);
    save_mixture(config.out_dir / "mixtures" / name, mix);
    record_mixture_files(manifest, config.out_dir, "mixtures/" + name,
                         mix.members.size());
    std::cout << "assembled " << name << " (" << mix.members.size()
              << " members)\n";
  }
  manifest.progress["assemble"] = {"complete", config.ensemble_sizes.size(),
                                   config.ensemble_sizes.size()};
  commit_manifest(config, manifest);
  return 0;
}

EnsembleMixture load_assembled(const ExperimentConfig& config,
                               std::size_t ensemble_size) {
  return load_mixture(config.out_dir / "mixtures" /
                      ("mixture_T" + std::to_string(ensemble_size)));
}

// ---------------------------------------------------------------------------
// sample

int cmd_sample(const ExperimentConfig& config, std::size_t ensemble_size,
               std::size_t count) {
  if (ensemble_size == 0) {
    ensemble_size = *std::max_element(config.ensemble_sizes.begin(),
                                      config.ensemble_sizes.end());
  }
  if (count == 0) count = config.dataset_size;
  RunManifest manifest = open_manifest(config, "sample");
  EnsembleMixture mix = load_assembled(config, ensemble_size);
  LabeledDataset ds = sample_mixture(
      mix, count, derive_seed(config.master_seed, "sample", ensemble_size));
  if (config.scheme != LabelScheme::kNone) {
    ds = assign_labels(ds.points, config.grid, config.scheme, ds.seed);
  }
  fs::create_directories(config.out_dir / "samples");
  const std::string name =
      "samples/synthetic_T" + std::to_string(ensemble_size) + ".csv";
  save_dataset(config.out_dir / name, ds);
  record_dataset_files(manifest, config.out_dir, name);
  manifest.progress["sample"] = {"complete", count, count};
  commit_manifest(config, manifest);
  std::cout << "wrote " << name << " (" << count << " points from T="
            << ensemble_size << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval-modes

int cmd_eval_modes(const ExperimentConfig& config, std::size_t workers) {
  RunManifest manifest = open_manifest(config, "eval-modes");
  SamplePool pool = load_pool(config.out_dir / "pool");
  fs::create_directories(config.out_dir / "reports");

  std::vector<BootstrapSummary> summaries;
  for (std::size_t t : config.ensemble_sizes) {
    if (t > pool.caches.size()) {
      throw ConfigError("ensemble size " + std::to_string(t) +
                        " exceeds the trained pool (pool_size = " +
                        std::to_string(pool.caches.size()) + ")");
    }
    BootstrapSummary summary = bootstrap_metrics(
        pool, t, config.grid, config.bootstrap.n_eval,
        config.bootstrap.iterations,
        derive_seed(config.master_seed, "bootstrap-eval", t), workers);
    std::cout << "T=" << t << ": modes " << summary.modes_mean << " +- "
              << summary.modes_std << ", high-quality "
              << summary.hq_mean * 100.0 << "% +- " << summary.hq_std * 100.0
              << "%\n";
    const std::string name =
        "reports/bootstrap_iterations_T" + std::to_string(t) + ".csv";
    save_bootstrap_iterations_csv(config.out_dir / name, summary);
    record_artifact(manifest, config.out_dir, name);
    summaries.push_back(std::move(summary));
  }
  save_bootstrap_csv(config.out_dir / "reports" / "bootstrap_summary.csv",
                     summaries);
  record_artifact(manifest, config.out_dir, "reports/bootstrap_summary.csv");
  manifest.progress["eval-modes"] = {"complete", summaries.size(),
                                     summaries.size()};
  commit_manifest(config, manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// eval-frechet

int cmd_eval_frechet(const ExperimentConfig& config) {
  RunManifest manifest = open_manifest(config, "eval-frechet");
  fs::create_directories(config.out_dir / "reports");
  Tensor real = sample_real(config.grid, config.frechet_samples,
                            derive_seed(config.master_seed, "frechet-real"));

  std::ofstream out(config.out_dir / "reports" / "frechet.csv");
  if (!out) {
    throw MissingArtifactError("cannot write reports/frechet.csv");
  }
  out << "T,frechet\n";
  for (std::size_t t : config.ensemble_sizes) {
    EnsembleMixture mix = load_assembled(config, t);
    LabeledDataset synth = sample_mixture(
        mix, config.frechet_samples,
        derive_seed(config.master_seed, "frechet-synth", t));
    const double d = frechet_2d(real, synth.points);
    out << t << "," << fmt_double(d) << "\n";
    std::cout << "T=" << t << ": frechet " << d << "\n";
  }
  out.close();
  record_artifact(manifest, config.out_dir, "reports/frechet.csv");
  manifest.progress["eval-frechet"] = {"complete",
                                       config.ensemble_sizes.size(),
                                       config.ensemble_sizes.size()};
  commit_manifest(config, manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// nn-audit

int cmd_nn_audit(const ExperimentConfig& config) {
  RunManifest manifest = open_manifest(config, "nn-audit");
  LabeledDataset data = ensure_dataset(config, manifest, "dataset.csv",
                                       "dataset");
  fs::create_directories(config.out_dir / "reports");

  for (std::size_t t : config.ensemble_sizes) {
    EnsembleMixture mix = load_assembled(config, t);
    LabeledDataset synth = sample_mixture(
        mix, config.dataset_size,
        derive_seed(config.master_seed, "audit-synth", t));
    std::vector<NnPair> pairs =
        nn_audit(data.points, synth.points, config.nn_audit_top);
    const std::string name =
        "reports/nn_audit_T" + std::to_string(t) + ".csv";
    std::ofstream out(config.out_dir / name);
    if (!out) {
      throw MissingArtifactError("cannot write " + name);
    }
    out << "rank,synth_index,real_index,distance\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      out << i << "," << pairs[i].synth_index << "," << pairs[i].real_index
          << "," << fmt_double(pairs[i].distance) << "\n";
    }
    out.close();
    record_artifact(manifest, config.out_dir, name);
    std::cout << "T=" << t << ": closest synthetic-real distance "
              << (pairs.empty() ? 0.0 : pairs.front().distance) << "\n";
  }
  manifest.progress["nn-audit"] = {"complete", config.ensemble_sizes.size(),
                                   config.ensemble_sizes.size()};
  commit_manifest(config, manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// heatmap

int cmd_heatmap(const ExperimentConfig& config, std::size_t member_index) {
  RunManifest manifest = open_manifest(config, "heatmap");
  if (member_index >= config.pool_size) {
    throw ConfigError("member index " + std::to_string(member_index) +
                      " exceeds the pool (pool_size = " +
                      std::to_string(config.pool_size) + ")");
  }
  GanMember member = load_pool_member(config, member_index);
  const double x_lo = config.grid.origin - config.grid.spacing / 2.0;
  const double x_hi = config.grid.origin +
                      config.grid.spacing *
                          (static_cast<double>(config.grid.grid_side) - 0.5);
  Heatmap map =
      score_heatmap(member, x_lo, x_hi, x_lo, x_hi,
                    config.heatmap_resolution, config.heatmap_resolution);
  fs::create_directories(config.out_dir / "reports");
  const std::string name =
      "reports/heatmap_" + zero_pad("member_%03zu", member_index) + ".csv";
  save_heatmap_csv(config.out_dir / name, map);
  record_artifact(manifest, config.out_dir, name);
  manifest.progress["heatmap"] = {"complete", 1, 1};
  commit_manifest(config, manifest);
  std::cout << "wrote " << name << " (" << config.heatmap_resolution << "x"
            << config.heatmap_resolution << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// downstream

int cmd_downstream(const ExperimentConfig& config) {
  if (config.scheme == LabelScheme::kNone) {
    throw ConfigError(
        "downstream needs label_scheme = checkerboard or halves");
  }
  RunManifest manifest = open_manifest(config, "downstream");
  LabeledDataset test = ensure_dataset(config, manifest, "test_dataset.csv",
                                       "test-dataset");
  fs::create_directories(config.out_dir / "reports");

  std::vector<DownstreamRecord> records;
  for (std::size_t t : config.ensemble_sizes) {
    EnsembleMixture mix = load_assembled(config, t);
    LabeledDataset raw = sample_mixture(
        mix, config.dataset_size,
        derive_seed(config.master_seed, "downstream-synth", t));
    LabeledDataset synth =
        assign_labels(raw.points, config.grid, config.scheme, raw.seed);
    double mean_best = 0.0;
    for (std::size_t r = 0; r < config.downstream.seeds; ++r) {
      ClassifierConfig cc = config.downstream.classifier;
      cc.seed = derive_seed(config.master_seed, "classifier", t, r);
      AccuracyCurve curve = train_classifier(synth, test, cc);
      const std::string name = "reports/curve_T" + std::to_string(t) +
                               "_seed" + zero_pad("%02zu", r) + ".csv";
      save_curve_csv(config.out_dir / name, curve);
      record_artifact(manifest, config.out_dir, name);
      CurveStability stability =
          curve_stability(curve, config.downstream.tail_fraction);
      records.push_back({method_name(config.method), t, r,
                         curve.best_accuracy, curve.final_accuracy,
                         stability.tail_mean, stability.tail_std,
                         stability.best_minus_final});
      mean_best += curve.best_accuracy;
    }
    std::cout << "T=" << t << ": mean best accuracy "
              << mean_best / static_cast<double>(config.downstream.seeds)
              << " over " << config.downstream.seeds << " seeds\n";
  }
  save_downstream_summary_csv(
      config.out_dir / "reports" / "downstream_summary.csv", records);
  record_artifact(manifest, config.out_dir,
                  "reports/downstream_summary.csv");
  manifest.progress["downstream"] = {"complete", records.size(),
                                     records.size()};
  commit_manifest(config, manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// report

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MissingArtifactError("cannot read " + path.string());
  }
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

int cmd_report(const ExperimentConfig& config) {
  RunManifest manifest = open_manifest(config, "report");
  const fs::path reports = config.out_dir / "reports";
  nlohmann::json out;
  out["tool"] = kToolName;
  out["version"] = kToolVersion;
  out["master_seed"] = config.master_seed;
  out["profile"] = profile_name(config.profile);
  out["method"] = method_name(config.method);
  bool any = false;

  if (fs::exists(reports / "bootstrap_summary.csv")) {
    any = true;
    nlohmann::json rows = nlohmann::json::array();
    auto csv = read_csv(reports / "bootstrap_summary.csv");
    for (std::size_t i = 1; i < csv.size(); ++i) {
      if (csv[i].size() < 5) continue;
      rows.push_back({{"T", std::stoull(csv[i][0])},
                      {"modes_mean", std::stod(csv[i][1])},
                      {"modes_std", std::stod(csv[i][2])},
                      {"hq_mean", std::stod(csv[i][3])},
                      {"hq_std", std::stod(csv[i][4])}});
      std::cout << "T=" << csv[i][0] << "  modes " << csv[i][1] << " +- "
                << csv[i][2] << "  hq " << csv[i][3] << "\n";
    }
    out["bootstrap"] = rows;
  }
  if (fs::exists(reports / "frechet.csv")) {
    any = true;
    nlohmann::json rows = nlohmann::json::array();
    auto csv = read_csv(reports / "frechet.csv");
    for (std::size_t i = 1; i < csv.size(); ++i) {
      if (csv[i].size() < 2) continue;
      rows.push_back({{"T", std::stoull(csv[i][0])},
                      {"frechet", std::stod(csv[i][1])}});
    }
    out["frechet"] = rows;
  }
  if (fs::exists(reports / "downstream_summary.csv")) {
    any = true;
    std::map<std::size_t, std::vector<std::vector<double>>> per_t;
    auto csv = read_csv(reports / "downstream_summary.csv");
    for (std::size_t i = 1; i < csv.size(); ++i) {
      if (csv[i].size() < 8) continue;
      const std::size_t t = std::stoull(csv[i][1]);
      per_t[t].push_back({std::stod(csv[i][3]), std::stod(csv[i][4]),
                          std::stod(csv[i][6])});
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [t, runs] : per_t) {
      double best = 0.0, final_acc = 0.0, tail_std = 0.0;
      for (const auto& run : runs) {
        best += run[0];
        final_acc += run[1];
        tail_std += run[2];
      }
      const double n = static_cast<double>(runs.size());
      rows.push_back({{"T", t},
                      {"seeds", runs.size()},
                      {"mean_best_accuracy", best / n},
                      {"mean_final_accuracy", final_acc / n},
                      {"mean_tail_std", tail_std / n}});
      std::cout << "downstream T=" << t << "  mean best accuracy "
                << best / n << "  mean tail std " << tail_std / n << "\n";
    }
    out["downstream"] = rows;
  }
  {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t t : config.ensemble_sizes) {
      const fs::path path =
          reports / ("nn_audit_T" + std::to_string(t) + ".csv");
      if (!fs::exists(path)) continue;
      any = true;
      auto csv = read_csv(path);
      if (csv.size() > 1 && csv[1].size() >= 4) {
        rows.push_back({{"T", t},
                        {"min_distance", std::stod(csv[1][3])},
                        {"pairs", csv.size() - 1}});
      }
    }
    if (!rows.empty()) out["nn_audit"] = rows;
  }

  if (!any) {
    throw MissingArtifactError(
        "nothing to report: run eval-modes, eval-frechet, nn-audit, or "
        "downstream first");
  }
  fs::create_directories(reports);
  std::ofstream file(reports / "report.json");
  if (!file) {
    throw MissingArtifactError("cannot write reports/report.json");
  }
  file << out.dump(2) << "\n";
  file.close();
  record_artifact(manifest, config.out_dir, "reports/report.json");
  manifest.progress["report"] = {"complete", 1, 1};
  commit_manifest(config, manifest);
  std::cout << "wrote reports/report.json\n";
  return 0;
}

}  // namespace
}  // namespace gansemble

int main(int argc, char** argv) {
  using namespace gansemble;

  CLI::App app{"GAN ensembles on the 2D Gaussian grid: training, "
               "mode-coverage metrics, and train-on-synthetic evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string profile_str;
  std::string out_str;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool resume = false;
  app.add_option("--config", config_path, "key=value experiment config file");
  app.add_option("--profile", profile_str, "profile: ci or paper")
      ->check(CLI::IsMember({"ci", "paper"}));
  app.add_option("--out", out_str, "run directory (overrides config)");
  auto* seed_opt =
      app.add_option("--seed", seed, "master seed (overrides config)");
  app.add_option("--workers", workers, "parallel trainings per wave")
      ->check(CLI::PositiveNumber);
  app.add_flag("--resume", resume, "continue a partially completed command");

  std::size_t ensemble_size = 0;
  std::size_t sample_count = 0;
  std::size_t member_index = 0;

  CLI::App* train_pool = app.add_subcommand(
      "train-pool", "train the generator pool and cache its samples");
  CLI::App* boost = app.add_subcommand(
      "boost", "train a boosted mixture with reweighted data");
  CLI::App* assemble = app.add_subcommand(
      "assemble", "build mixture artifacts for every ensemble size");
  CLI::App* sample =
      app.add_subcommand("sample", "draw a labeled synthetic dataset");
  sample->add_option("--ensemble-size", ensemble_size,
                     "mixture to sample (default: largest configured)");
  sample->add_option("--count", sample_count,
                     "points to draw (default: dataset_size)");
  CLI::App* eval_modes = app.add_subcommand(
      "eval-modes", "bootstrap mode coverage over the pool");
  CLI::App* eval_frechet = app.add_subcommand(
      "eval-frechet", "frechet distance between real and mixture samples");
  CLI::App* nn_audit_cmd = app.add_subcommand(
      "nn-audit", "nearest-neighbor memorization audit");
  CLI::App* heatmap = app.add_subcommand(
      "heatmap", "discriminator score field over the grid");
  heatmap->add_option("--member", member_index, "pool member to map");
  CLI::App* downstream = app.add_subcommand(
      "downstream", "train classifiers on synthetic data per ensemble size");
  CLI::App* report =
      app.add_subcommand("report", "aggregate reports into report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::optional<Profile> profile_override;
    if (!profile_str.empty()) {
      profile_override = profile_from_name(profile_str);
    }
    ExperimentConfig config =
        config_path.empty()
            ? default_config(profile_override.value_or(Profile::kCi))
            : load_experiment_config(config_path, profile_override);
    if (seed_opt->count() > 0) config.master_seed = seed;
    if (!out_str.empty()) config.out_dir = out_str;
    validate_experiment(config);

    if (train_pool->parsed()) return cmd_train_pool(config, workers, resume);
    if (boost->parsed()) return cmd_boost(config, resume);
    if (assemble->parsed()) return cmd_assemble(config);
    if (sample->parsed()) return cmd_sample(config, ensemble_size,
                                            sample_count);
    if (eval_modes->parsed()) return cmd_eval_modes(config, workers);
    if (eval_frechet->parsed()) return cmd_eval_frechet(config);
    if (nn_audit_cmd->parsed()) return cmd_nn_audit(config);
    if (heatmap->parsed()) return cmd_heatmap(config, member_index);
    if (downstream->parsed()) return cmd_downstream(config);
    if (report->parsed()) return cmd_report(config);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const MissingArtifactError& e) {
    std::cerr << "missing artifact: " << e.what() << "\n";
    return 4;
  }
}
